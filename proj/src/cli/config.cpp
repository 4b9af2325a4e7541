#include "nrbo/cli/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "nrbo/errors.hpp"

namespace nrbo::cli {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& parts) {
    std::ostringstream out;
    for (std::size_t i = 0; i < parts.size(); ++i) out << (i ? "; " : "") << parts[i];
    return out.str();
}

// Collects field-level diagnostics while reading one JSON object.
class Section {
public:
    Section(const json& node, std::string path, std::vector<std::string>& diags)
        : node_(node), path_(std::move(path)), diags_(diags) {
        if (!node_.is_object()) error("", "must be an object");
    }

    ~Section() {
        if (!node_.is_object()) return;
        for (const auto& [key, value] : node_.items())
            if (!known_.count(key)) error(key, "unknown key");
    }

    Section(const Section&) = delete;
    Section& operator=(const Section&) = delete;

    bool has(const std::string& key) {
        known_.insert(key);
        return node_.is_object() && node_.contains(key);
    }

    const json* get(const std::string& key, bool required) {
        if (has(key)) return &node_.at(key);
        if (required) error(key, "is required");
        return nullptr;
    }

    template <typename T>
    std::optional<T> value(const std::string& key, bool required = false) {
        const json* v = get(key, required);
        if (!v) return std::nullopt;
        try {
            if constexpr (std::is_same_v<T, double>) {
                if (!v->is_number()) throw std::invalid_argument("expected a number");
            } else if constexpr (std::is_integral_v<T>) {
                if (!v->is_number_integer()) throw std::invalid_argument("expected an integer");
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v->is_string()) throw std::invalid_argument("expected a string");
            } else if constexpr (std::is_same_v<T, bool>) {
                if (!v->is_boolean()) throw std::invalid_argument("expected a boolean");
            }
            return v->get<T>();
        } catch (const std::exception& e) {
            error(key, e.what());
            return std::nullopt;
        }
    }

    void error(const std::string& key, const std::string& what) {
        diags_.push_back((key.empty() ? path_ : path_ + "." + key) + ": " + what);
    }

    std::string path(const std::string& key) const { return path_ + "." + key; }

private:
    const json& node_;
    std::string path_;
    std::vector<std::string>& diags_;
    std::set<std::string> known_;
};

template <typename T>
void assign(std::optional<T> v, T& target) {
    if (v) target = *v;
}

void read_schedule(Section& parent, ScheduleConfig& s, std::vector<std::string>& diags) {
    const json* node = parent.get("schedule", false);
    if (!node) return;
    Section sec(*node, parent.path("schedule"), diags);
    assign(sec.value<double>("sigma1_base"), s.sigma1_base);
    assign(sec.value<double>("sigma1_span"), s.sigma1_span);
    assign(sec.value<double>("sigma2_base"), s.sigma2_base);
    assign(sec.value<double>("sigma2_span"), s.sigma2_span);
    for (auto [name, v] : {std::pair{"sigma1_base", s.sigma1_base}, {"sigma1_span", s.sigma1_span},
                           {"sigma2_base", s.sigma2_base}, {"sigma2_span", s.sigma2_span}})
        if (!(v >= 0.0)) sec.error(name, "must be >= 0");
}

// Shared optimizer knobs; variant and seed are only read when with_identity is set.
void read_optimizer(Section& sec, OptimizerConfig& opt, bool with_identity, std::vector<std::string>& diags) {
    if (with_identity) {
        if (auto v = sec.value<std::string>("variant")) {
            if (auto parsed = parse_variant(*v))
                opt.variant = *parsed;
            else
                sec.error("variant", "unknown variant '" + *v + "'");
        }
        if (auto seed = sec.value<std::int64_t>("seed")) opt.rng_seed = static_cast<std::uint64_t>(*seed);
    }
    assign(sec.value<int>("budget"), opt.budget);
    assign(sec.value<int>("init_count"), opt.init_count);
    assign(sec.value<int>("batch_size"), opt.batch_size);
    assign(sec.value<int>("grid_points_per_dim"), opt.grid_points_per_dim);
    assign(sec.value<int>("gp_restarts"), opt.gp_restarts);
    assign(sec.value<double>("kappa"), opt.kappa);
    assign(sec.value<bool>("density_reward"), opt.density_reward);
    read_schedule(sec, opt.schedule, diags);

    if (opt.budget < 1) sec.error("budget", "must be >= 1");
    if (opt.init_count < 1) sec.error("init_count", "must be >= 1");
    if (opt.batch_size < 1 || opt.batch_size > opt.budget) sec.error("batch_size", "must be in [1, budget]");
    if (opt.grid_points_per_dim < 2) sec.error("grid_points_per_dim", "must be >= 2");
    if (opt.gp_restarts < 1) sec.error("gp_restarts", "must be >= 1");
    if (!(opt.kappa > 0.0)) sec.error("kappa", "must be > 0");
}

SearchSpace read_space(const json& node, std::vector<std::string>& diags) {
    if (!node.is_array() || node.empty()) {
        diags.push_back("space: must be a non-empty array of dimensions");
        return {};
    }
    std::vector<Dimension> dims;
    for (std::size_t i = 0; i < node.size(); ++i) {
        Section sec(node[i], "space[" + std::to_string(i) + "]", diags);
        Dimension d;
        assign(sec.value<std::string>("name", true), d.name);
        assign(sec.value<double>("lower", true), d.lower);
        assign(sec.value<double>("upper", true), d.upper);
        if (auto scale = sec.value<std::string>("scale")) {
            if (*scale == "linear")
                d.scale = Scale::linear;
            else if (*scale == "log10" || *scale == "log")
                d.scale = Scale::log10;
            else
                sec.error("scale", "must be 'linear' or 'log10'");
        }
        dims.push_back(d);
    }
    try {
        return SearchSpace(std::move(dims));
    } catch (const DomainError& e) {
        diags.push_back(std::string("space: ") + e.what());
        return {};
    }
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({path.string() + ": cannot open"});
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError({path.string() + ": " + e.what()});
    }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path out(p);
    return out.is_absolute() || base.empty() ? out : base / out;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> diagnostics)
    : std::runtime_error("config error: " + join(diagnostics)), diagnostics_(std::move(diagnostics)) {}

RunConfig parse_run_config(const json& doc, const std::filesystem::path& base_dir) {
    std::vector<std::string> diags;
    RunConfig cfg;
    {
        Section root(doc, "config", diags);
        assign(root.value<std::string>("study", true), cfg.study);
        if (const json* space = root.get("space", true)) cfg.optimizer.space = read_space(*space, diags);
        if (const json* opt = root.get("optimizer", true)) {
            Section sec(*opt, "optimizer", diags);
            read_optimizer(sec, cfg.optimizer, true, diags);
        }
        if (const json* obj = root.get("objective", true)) {
            Section sec(*obj, "objective", diags);
            if (auto dir = sec.value<std::string>("direction")) {
                if (*dir == "minimize")
                    cfg.direction = Direction::minimize;
                else if (*dir == "maximize")
                    cfg.direction = Direction::maximize;
                else
                    sec.error("direction", "must be 'minimize' or 'maximize'");
            }
            const bool has_builtin = sec.has("builtin");
            const bool has_command = sec.has("command");
            if (has_builtin == has_command) sec.error("", "exactly one of 'builtin' or 'command' is required");
            if (has_builtin) {
                BuiltinObjective b;
                assign(sec.value<std::string>("builtin"), b.name);
                assign(sec.value<double>("noise"), b.noise);
                try {
                    const auto d = static_cast<int>(cfg.optimizer.space.dim());
                    const auto probe = make_objective(b.name, b.noise, 0, std::max(d, 1));
                    if (d != 0 && probe.dimension != d)
                        sec.error("builtin", "objective '" + b.name + "' needs a " + std::to_string(probe.dimension) +
                                                 "-dimensional space, got " + std::to_string(d));
                } catch (const DomainError& e) {
                    sec.error("builtin", e.what());
                }
                cfg.builtin = b;
            }
            if (has_command) {
                ExternalObjective e;
                const json* cmd = sec.get("command", false);
                if (cmd && cmd->is_array() && !cmd->empty() &&
                    std::all_of(cmd->begin(), cmd->end(), [](const json& a) { return a.is_string(); }))
                    e.command = cmd->get<std::vector<std::string>>();
                else
                    sec.error("command", "must be a non-empty array of strings");
                assign(sec.value<std::string>("objective_key"), e.objective_key);
                if (auto t = sec.value<double>("timeout_seconds", true)) {
                    e.timeout_seconds = *t;
                    if (!(e.timeout_seconds > 0.0)) sec.error("timeout_seconds", "must be > 0");
                }
                e.working_dir = base_dir;
                if (auto wd = sec.value<std::string>("working_dir")) e.working_dir = resolve(base_dir, *wd);
                cfg.external = e;
            }
        }
        if (auto out = root.value<std::string>("output_dir", true)) cfg.output_dir = resolve(base_dir, *out);
    }
    if (diags.empty()) {
        try {
            cfg.optimizer.validate();
        } catch (const DomainError& e) {
            diags.push_back(e.what());
        }
    }
    if (!diags.empty()) throw ConfigError(std::move(diags));
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    return parse_run_config(read_json_file(path), path.parent_path());
}

MatrixConfig parse_matrix_config(const json& doc, const std::filesystem::path& base_dir) {
    std::vector<std::string> diags;
    MatrixConfig cfg;
    {
        Section root(doc, "matrix", diags);
        if (const json* objs = root.get("objectives", true)) {
            if (!objs->is_array() || objs->empty()) diags.push_back("matrix.objectives: must be a non-empty array");
            for (std::size_t i = 0; objs->is_array() && i < objs->size(); ++i) {
                Section sec((*objs)[i], "matrix.objectives[" + std::to_string(i) + "]", diags);
                auto name = sec.value<std::string>("name", true);
                const double noise = sec.value<double>("noise").value_or(0.0);
                const int dim = sec.value<int>("dimension").value_or(2);
                if (!name) continue;
                try {
                    cfg.objectives.push_back(make_objective(*name, noise, 0, dim));
                } catch (const DomainError& e) {
                    sec.error("name", e.what());
                }
            }
        }
        if (const json* vars = root.get("variants", true)) {
            if (!vars->is_array() || vars->empty()) diags.push_back("matrix.variants: must be a non-empty array");
            for (std::size_t i = 0; vars->is_array() && i < vars->size(); ++i) {
                const auto& v = (*vars)[i];
                auto parsed = v.is_string() ? parse_variant(v.get<std::string>()) : std::nullopt;
                if (parsed)
                    cfg.variants.push_back(*parsed);
                else
                    diags.push_back("matrix.variants[" + std::to_string(i) + "]: unknown variant " + v.dump());
            }
        }
        if (const json* seeds = root.get("seeds", true)) {
            if (!seeds->is_array() || seeds->empty()) diags.push_back("matrix.seeds: must be a non-empty array");
            for (std::size_t i = 0; seeds->is_array() && i < seeds->size(); ++i) {
                if ((*seeds)[i].is_number_integer())
                    cfg.seeds.push_back((*seeds)[i].get<std::uint64_t>());
                else
                    diags.push_back("matrix.seeds[" + std::to_string(i) + "]: expected an integer");
            }
        }
        if (const json* opt = root.get("optimizer", false)) {
            Section sec(*opt, "matrix.optimizer", diags);
            read_optimizer(sec, cfg.optimizer, false, diags);
        }
        if (const json* rob = root.get("robustness", false)) {
            Section sec(*rob, "matrix.robustness", diags);
            RobustnessConfig r;
            if (const json* levels = sec.get("noise_levels", true)) {
                if (levels->is_array() && !levels->empty() &&
                    std::all_of(levels->begin(), levels->end(), [](const json& a) { return a.is_number(); }))
                    r.noise_levels = levels->get<std::vector<double>>();
                else
                    sec.error("noise_levels", "must be a non-empty array of numbers");
            }
            assign(sec.value<int>("n_train"), r.n_train);
            assign(sec.value<double>("radius"), r.radius);
            if (r.n_train < 10) sec.error("n_train", "must be >= 10");
            if (!(r.radius >= 0.0)) sec.error("radius", "must be >= 0");
            if (const json* seeds = sec.get("seeds", false)) {
                if (seeds->is_array() && !seeds->empty() &&
                    std::all_of(seeds->begin(), seeds->end(), [](const json& a) { return a.is_number_integer(); }))
                    r.seeds = seeds->get<std::vector<std::uint64_t>>();
                else
                    sec.error("seeds", "must be a non-empty array of integers");
            } else {
                r.seeds = cfg.seeds;
            }
            cfg.robustness = r;
        }
        if (auto out = root.value<std::string>("output_dir", true)) cfg.output_dir = resolve(base_dir, *out);
    }
    if (diags.empty()) {
        for (const auto& o : cfg.objectives) {
            if (cfg.optimizer.space.dim() == 0) cfg.optimizer.space = unit_cube(static_cast<std::size_t>(o.dimension));
            if (cfg.optimizer.space.dim() != static_cast<std::size_t>(o.dimension))
                diags.push_back("matrix.objectives: all objectives must share one dimension");
        }
    }
    if (diags.empty()) {
        try {
            cfg.optimizer.validate();
        } catch (const DomainError& e) {
            diags.push_back(e.what());
        }
    }
    if (!diags.empty()) throw ConfigError(std::move(diags));
    return cfg;
}

MatrixConfig load_matrix_config(const std::filesystem::path& path) {
    return parse_matrix_config(read_json_file(path), path.parent_path());
}

}  // namespace nrbo::cli
