#ifndef NRBO_SCHEDULE_HPP
#define NRBO_SCHEDULE_HPP

namespace nrbo {

/// Linear radius schedules over a budget of total_iterations suggestion rounds.
/// The smoothing radius shrinks from sigma1_base + sigma1_span to sigma1_base;
/// the density radius grows from sigma2_base to sigma2_base + sigma2_span.
struct ScheduleConfig {
    double sigma1_base = 0.05;
    double sigma1_span = 0.10;
    double sigma2_base = 0.05;
    double sigma2_span = 0.15;
    int total_iterations = 1;

    void validate() const;
};

struct ScheduleState {
    int iteration = 0;
    double sigma1_now = 0.0;
    double sigma2_now = 0.0;
};

double sigma1_at(const ScheduleConfig& cfg, int i);
double sigma2_at(const ScheduleConfig& cfg, int i);
ScheduleState schedule_at(const ScheduleConfig& cfg, int i);

}  // namespace nrbo

#endif  // NRBO_SCHEDULE_HPP
