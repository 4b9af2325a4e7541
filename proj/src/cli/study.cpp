#include "nrbo/cli/study.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "nrbo/cli/external.hpp"
#include "nrbo/errors.hpp"

namespace nrbo::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    ::gmtime_r(&t, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

std::vector<double> to_vector(const Point& p) { return {p.data(), p.data() + p.size()}; }

Point to_point(const std::vector<double>& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())); }

json params_of(const SearchSpace& space, const Point& p) {
    const Eigen::VectorXd raw = space.denormalize(p);
    json params = json::object();
    for (std::size_t i = 0; i < space.dim(); ++i) params[space[i].name] = raw[static_cast<Eigen::Index>(i)];
    return params;
}

// Raised to stop a study with a specific exit code after diagnostics were printed.
struct StudyAbort {
    int code;
};

class Study {
public:
    Study(RunConfig cfg, fs::path log_path, std::optional<std::size_t> stop_after, std::ostream& out, std::ostream& err)
        : cfg_(std::move(cfg)), log_path_(std::move(log_path)), stop_after_(stop_after), out_(out), err_(err),
          engine_(cfg_.optimizer) {
        if (cfg_.builtin) {
            const auto& b = *cfg_.builtin;
            builtin_ = make_objective(b.name, b.noise, objective_stream_seed(cfg_.optimizer.rng_seed, b.name),
                                      static_cast<int>(cfg_.optimizer.space.dim()));
        }
    }

    // Re-applies logged trials. Returns false (after printing a diff) when the log diverges from the config.
    bool replay(const std::vector<TrialLogRecord>& records) {
        std::size_t idx = 0;
        std::vector<TrialLogRecord> ok;
        for (const auto& r : records)
            if (r.status == "ok") ok.push_back(r);
        while (idx < ok.size()) {
            if (engine_.phase() == Phase::finished) {
                err_ << "resume: log has " << ok.size() - idx << " more trial(s) than the configured budget allows\n";
                return false;
            }
            const auto points = engine_.ask();
            std::vector<Observation> results;
            for (const auto& p : points) {
                if (idx == ok.size()) break;
                const auto& r = ok[idx];
                const int expected_iter = engine_.pending_iteration();
                if (r.point.size() != p.size() || r.point != p || r.iteration != expected_iter) {
                    err_ << "resume: log does not match config at trial " << r.trial << "\n"
                         << "  log:    iteration " << r.iteration << " point " << json(to_vector(r.point)).dump()
                         << "\n"
                         << "  config: iteration " << expected_iter << " point " << json(to_vector(p)).dump() << "\n"
                         << "  (check seed, variant, search space and optimizer settings)\n";
                    return false;
                }
                results.push_back({p, r.value});
                ++idx;
                ++trials_;
            }
            if (results.size() == points.size()) {
                engine_.tell(results);
            } else {
                carried_ = std::move(results);
            }
        }
        return true;
    }

    // Runs ask/tell to the budget, appending to log. Returns true when finished.
    bool drive(std::ofstream& log) {
        while (engine_.phase() != Phase::finished) {
            std::vector<Point> points =
                engine_.phase() == Phase::awaiting_observation ? engine_.pending() : engine_.ask();
            const auto sched = engine_.last_schedule();
            const int iteration = engine_.pending_iteration();
            std::vector<Observation> results = std::move(carried_);
            carried_.clear();
            for (std::size_t j = results.size(); j < points.size(); ++j) {
                if (stop_after_ && trials_ >= *stop_after_) return false;
                const Point& p = points[j];
                TrialLogRecord rec;
                rec.trial = static_cast<int>(trials_);
                rec.iteration = iteration;
                rec.point = p;
                rec.params = params_of(cfg_.optimizer.space, p);
                rec.sigma1 = sched.sigma1_now;
                rec.sigma2 = sched.sigma2_now;
                try {
                    rec.objective = evaluate(p, rec.params);
                } catch (const EvalError& e) {
                    rec.status = "failed";
                    rec.error_kind = std::string(to_string(e.kind()));
                    rec.error = e.what();
                    rec.timestamp = utc_timestamp();
                    log << to_json(rec).dump() << '\n';
                    log.flush();
                    err_ << "trial " << rec.trial << " failed twice (" << rec.error_kind << "): " << rec.error << "\n";
                    throw StudyAbort{kExitProtocol};
                }
                rec.value = cfg_.to_engine(rec.objective);
                rec.timestamp = utc_timestamp();
                log << to_json(rec).dump() << '\n';
                log.flush();
                results.push_back({p, rec.value});
                ++trials_;
            }
            engine_.tell(results);
        }
        return true;
    }

    json summary(bool finished) const {
        json s;
        s["study"] = cfg_.study;
        s["status"] = finished ? "finished" : "interrupted";
        s["variant"] = std::string(to_string(cfg_.optimizer.variant));
        s["seed"] = cfg_.optimizer.rng_seed;
        s["direction"] = cfg_.direction == Direction::maximize ? "maximize" : "minimize";
        s["trials"] = trials_;
        if (!engine_.observations().empty()) {
            const auto& trials = engine_.observations().trials();
            const Trial& best = engine_.result();
            const auto index = static_cast<std::size_t>(&best - trials.data());
            s["best"] = {{"trial", index},
                         {"iteration", best.iteration},
                         {"params", params_of(cfg_.optimizer.space, best.point)},
                         {"point", to_vector(best.point)},
                         {"objective", cfg_.from_engine(best.raw_value)},
                         {"value", best.raw_value}};
        }
        return s;
    }

    const Engine& engine() const { return engine_; }
    std::size_t trials() const { return trials_; }

private:
    double evaluate(const Point& p, const json& params) {
        if (builtin_) return eval_objective(*builtin_, p, trials_);
        const auto& ext = *cfg_.external;
        const auto timeout = std::chrono::duration<double>(ext.timeout_seconds);
        try {
            return evaluate_external(ext.command, params, timeout, ext.objective_key, ext.working_dir);
        } catch (const EvalError& e) {
            err_ << "trial " << trials_ << ": " << to_string(e.kind()) << ": " << e.what() << "; retrying once\n";
        }
        return evaluate_external(ext.command, params, timeout, ext.objective_key, ext.working_dir);
    }

    RunConfig cfg_;
    fs::path log_path_;
    std::optional<std::size_t> stop_after_;
    std::ostream& out_;
    std::ostream& err_;
    Engine engine_;
    std::optional<SyntheticObjective> builtin_;
    std::vector<Observation> carried_;
    std::size_t trials_ = 0;
};

void write_json_file(const fs::path& path, const json& doc) {
    std::ofstream f(path);
    f << std::setw(2) << doc << '\n';
}

struct Paths {
    fs::path out_dir;
    fs::path log;
};

std::optional<RunConfig> load_with_overrides(const fs::path& config_path, const StudyOptions& opts, std::ostream& err) {
    try {
        RunConfig cfg = load_run_config(config_path);
        if (opts.seed) cfg.optimizer.rng_seed = *opts.seed;
        if (opts.out_dir) cfg.output_dir = *opts.out_dir;
        return cfg;
    } catch (const ConfigError& e) {
        err << "config error:\n";
        for (const auto& d : e.diagnostics()) err << "  " << d << '\n';
        return std::nullopt;
    }
}

int finish(Study& study, const fs::path& out_dir, bool finished, std::ostream& out) {
    const json summary = study.summary(finished);
    write_json_file(out_dir / "summary.json", summary);
    out << summary.dump(2) << '\n';
    return kExitOk;
}

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
    try {
        return body();
    } catch (const StudyAbort& a) {
        return a.code;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const ProtocolError& e) {
        err << "protocol error: " << e.what() << '\n';
        return kExitProtocol;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace

json to_json(const TrialLogRecord& r) {
    json j;
    j["trial"] = r.trial;
    j["iteration"] = r.iteration;
    j["point"] = to_vector(r.point);
    j["params"] = r.params;
    j["status"] = r.status;
    if (r.status == "ok") {
        j["objective"] = r.objective;
        j["value"] = r.value;
    } else {
        j["error_kind"] = r.error_kind;
        j["error"] = r.error;
    }
    j["sigma1"] = r.sigma1;
    j["sigma2"] = r.sigma2;
    j["timestamp"] = r.timestamp;
    return j;
}

TrialLogRecord trial_record_from_json(const json& j) {
    TrialLogRecord r;
    r.trial = j.at("trial").get<int>();
    r.iteration = j.at("iteration").get<int>();
    r.point = to_point(j.at("point").get<std::vector<double>>());
    r.params = j.value("params", json::object());
    r.status = j.value("status", std::string("ok"));
    if (r.status == "ok") {
        r.objective = j.at("objective").get<double>();
        r.value = j.at("value").get<double>();
    } else {
        r.error_kind = j.value("error_kind", std::string());
        r.error = j.value("error", std::string());
    }
    r.sigma1 = j.value("sigma1", 0.0);
    r.sigma2 = j.value("sigma2", 0.0);
    r.timestamp = j.value("timestamp", std::string());
    return r;
}

std::vector<TrialLogRecord> read_trial_log(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trial log " + path.string());
    std::vector<TrialLogRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            out.push_back(trial_record_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

int run_study(const fs::path& config_path, const StudyOptions& opts, std::ostream& out, std::ostream& err) {
    auto cfg = load_with_overrides(config_path, opts, err);
    if (!cfg) return kExitConfig;
    return guarded(err, [&] {
        const fs::path out_dir = cfg->output_dir;
        fs::create_directories(out_dir);
        const fs::path log_path = opts.log_path.value_or(out_dir / "trials.jsonl");
        if (log_path.has_parent_path()) fs::create_directories(log_path.parent_path());
        std::ofstream log(log_path, std::ios::trunc);
        if (!log) throw std::runtime_error("cannot write trial log " + log_path.string());
        Study study(*cfg, log_path, opts.stop_after, out, err);
        const bool finished = study.drive(log);
        return finish(study, out_dir, finished, out);
    });
}

int resume_study(const fs::path& config_path, const fs::path& log_path, const StudyOptions& opts, std::ostream& out,
                 std::ostream& err) {
    auto cfg = load_with_overrides(config_path, opts, err);
    if (!cfg) return kExitConfig;
    return guarded(err, [&] {
        const auto records = read_trial_log(log_path);
        Study study(*cfg, log_path, opts.stop_after, out, err);
        if (!study.replay(records)) return static_cast<int>(kExitConfig);
        if (study.engine().phase() == Phase::finished) {
            out << "study already finished; nothing to do\n";
            return static_cast<int>(kExitOk);
        }
        fs::create_directories(cfg->output_dir);
        std::ofstream log(log_path, std::ios::app);
        if (!log) throw std::runtime_error("cannot append to trial log " + log_path.string());
        const bool finished = study.drive(log);
        return finish(study, cfg->output_dir, finished, out);
    });
}

json to_json(const RunRecord& r) {
    json steps = json::array();
    for (const auto& s : r.steps)
        steps.push_back({{"iteration", s.iteration},
                         {"point", to_vector(s.point)},
                         {"raw_value", s.raw_value},
                         {"best_so_far", s.best_so_far},
                         {"sigma1", s.sigma1},
                         {"sigma2", s.sigma2}});
    json j{{"objective", r.objective},
           {"variant", std::string(to_string(r.variant))},
           {"seed", r.seed},
           {"init_count", r.init_count},
           {"budget", r.budget},
           {"batch_size", r.batch_size},
           {"steps", steps},
           {"wall_seconds", r.wall_seconds}};
    if (!r.ok()) j["error"] = r.error;
    return j;
}

json to_json(const ScoreSummary& s) {
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    return {{"objective", s.objective},
            {"variant", s.variant},
            {"mean_best", num(s.mean_best)},
            {"std_best", num(s.std_best)},
            {"normalized_mean_score", num(s.normalized_mean_score)},
            {"runs", s.runs},
            {"seeds", s.seeds}};
}

std::vector<RobustnessRow> robustness_table(const RobustnessConfig& cfg, const FitOptions& fit) {
    std::vector<RobustnessRow> rows;
    for (double eps : cfg.noise_levels) {
        RobustnessRow row;
        row.noise_level = eps;
        for (auto seed : cfg.seeds) {
            const auto r = surrogate_robustness(eps, cfg.n_train, cfg.radius, seed, fit);
            row.rmse_plain += r.rmse_plain;
            row.rmse_regularized += r.rmse_regularized;
            if (r.rmse_regularized < r.rmse_plain) ++row.regularized_wins;
            ++row.seeds;
        }
        if (row.seeds > 0) {
            row.rmse_plain /= static_cast<double>(row.seeds);
            row.rmse_regularized /= static_cast<double>(row.seeds);
        }
        rows.push_back(row);
    }
    return rows;
}

void write_robustness_csv(std::ostream& out, const std::vector<RobustnessRow>& rows) {
    out << "noise_level,rmse_plain,rmse_regularized,regularized_wins,seeds\n";
    const auto old = out.precision(17);
    for (const auto& r : rows)
        out << r.noise_level << ',' << r.rmse_plain << ',' << r.rmse_regularized << ',' << r.regularized_wins << ','
            << r.seeds << '\n';
    out.precision(old);
}

int bench_command(const fs::path& matrix_path, const BenchOptions& opts, std::ostream& out, std::ostream& err) {
    MatrixConfig cfg;
    try {
        cfg = load_matrix_config(matrix_path);
    } catch (const ConfigError& e) {
        err << "config error:\n";
        for (const auto& d : e.diagnostics()) err << "  " << d << '\n';
        return kExitConfig;
    }
    if (opts.out_dir) cfg.output_dir = *opts.out_dir;
    return guarded(err, [&] {
        fs::create_directories(cfg.output_dir);
        const auto records = run_matrix(cfg.objectives, cfg.variants, cfg.seeds, cfg.optimizer, opts.jobs);

        std::ofstream traj(cfg.output_dir / "trajectories.csv");
        write_trajectories_csv(traj, records);

        std::ofstream runs(cfg.output_dir / "runs.jsonl");
        bool any_failed = false;
        for (const auto& r : records) {
            json j = to_json(r);
            j.erase("wall_seconds");  // keeps the file deterministic
            runs << j.dump() << '\n';
            if (!r.ok()) {
                any_failed = true;
                err << "run failed: " << r.objective << '/' << to_string(r.variant) << "/seed " << r.seed << ": "
                    << r.error << '\n';
            }
        }

        const auto scores = summarize(records, cfg.objectives);
        json summary = json::array();
        for (const auto& s : scores) summary.push_back(to_json(s));
        write_json_file(cfg.output_dir / "summary.json", {{"scores", summary}});

        out << std::left << std::setw(12) << "objective" << std::setw(18) << "variant" << std::setw(14) << "mean_best"
            << std::setw(14) << "std_best" << "norm_score\n";
        for (const auto& s : scores)
            out << std::setw(12) << s.objective << std::setw(18) << s.variant << std::setw(14) << s.mean_best
                << std::setw(14) << s.std_best << s.normalized_mean_score << '\n';

        if (cfg.robustness) {
            FitOptions fit = cfg.optimizer.fit;
            fit.restarts = static_cast<std::size_t>(cfg.optimizer.gp_restarts);
            const auto rows = robustness_table(*cfg.robustness, fit);
            std::ofstream rob(cfg.output_dir / "robustness.csv");
            write_robustness_csv(rob, rows);
            out << "\nsurrogate robustness (radius " << cfg.robustness->radius << ", n_train "
                << cfg.robustness->n_train << ")\n";
            write_robustness_csv(out, rows);
        }
        return any_failed ? static_cast<int>(kExitNumerical) : static_cast<int>(kExitOk);
    });
}

int report_command(const std::optional<fs::path>& log_path, const std::optional<fs::path>& out_dir, std::ostream& out,
                   std::ostream& err) {
    return guarded(err, [&] {
        std::optional<fs::path> log = log_path;
        if (!log && out_dir) {
            if (fs::exists(*out_dir / "summary.json") && !fs::exists(*out_dir / "trials.jsonl")) {
                std::ifstream f(*out_dir / "summary.json");
                const json doc = json::parse(f);
                out << std::left << std::setw(12) << "objective" << std::setw(18) << "variant" << std::setw(14)
                    << "mean_best" << std::setw(14) << "std_best" << std::setw(12) << "norm_score" << "runs\n";
                for (const auto& s : doc.at("scores")) {
                    auto show = [](const json& v) { return v.is_null() ? std::string("n/a") : v.dump(); };
                    out << std::setw(12) << s.at("objective").get<std::string>() << std::setw(18)
                        << s.at("variant").get<std::string>() << std::setw(14) << show(s.at("mean_best"))
                        << std::setw(14) << show(s.at("std_best")) << std::setw(12)
                        << show(s.at("normalized_mean_score")) << s.at("runs") << '\n';
                }
                return static_cast<int>(kExitOk);
            }
            log = *out_dir / "trials.jsonl";
        }
        if (!log) {
            err << "report: pass --log PATH or --out DIR\n";
            return static_cast<int>(kExitConfig);
        }
        const auto records = read_trial_log(*log);
        out << "trial,iteration,objective,best_value\n";
        double best = std::numeric_limits<double>::infinity();
        const TrialLogRecord* best_rec = nullptr;
        for (const auto& r : records) {
            if (r.status != "ok") {
                out << r.trial << ',' << r.iteration << ",failed(" << r.error_kind << "),"
                    << (best_rec ? best_rec->objective : std::nan("")) << '\n';
                continue;
            }
            if (r.value < best) {
                best = r.value;
                best_rec = &r;
            }
            out << r.trial << ',' << r.iteration << ',' << r.objective << ',' << best_rec->objective << '\n';
        }
        if (best_rec) out << "best: trial " << best_rec->trial << " params " << best_rec->params.dump() << " objective "
                          << best_rec->objective << '\n';
        return static_cast<int>(kExitOk);
    });
}

}  // namespace nrbo::cli
