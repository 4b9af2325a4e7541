#include "nrbo/schedule.hpp"

#include <cmath>
#include <string>

#include "nrbo/errors.hpp"

namespace nrbo {

void ScheduleConfig::validate() const {
    auto check = [](double v, const char* name) {
        if (!std::isfinite(v) || v < 0.0) throw DomainError(std::string("schedule ") + name + " must be finite and >= 0");
    };
    check(sigma1_base, "sigma1_base");
    check(sigma1_span, "sigma1_span");
    check(sigma2_base, "sigma2_base");
    check(sigma2_span, "sigma2_span");
    if (total_iterations < 1) throw DomainError("schedule total_iterations must be >= 1");
}

namespace {

double progress(const ScheduleConfig& cfg, int i) {
    cfg.validate();
    if (i < 0 || i > cfg.total_iterations)
        throw DomainError("schedule iteration " + std::to_string(i) + " outside [0, " +
                          std::to_string(cfg.total_iterations) + "]");
    return static_cast<double>(i) / static_cast<double>(cfg.total_iterations);
}

}  // namespace

double sigma1_at(const ScheduleConfig& cfg, int i) {
    const double t = progress(cfg, i);
    return cfg.sigma1_base + (1.0 - t) * cfg.sigma1_span;
}

double sigma2_at(const ScheduleConfig& cfg, int i) {
    const double t = progress(cfg, i);
    return cfg.sigma2_base + t * cfg.sigma2_span;
}

ScheduleState schedule_at(const ScheduleConfig& cfg, int i) { return {i, sigma1_at(cfg, i), sigma2_at(cfg, i)}; }

}  // namespace nrbo
