#include "tqd/cli.hpp"

#include "tqd/error.hpp"
#include "tqd/io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>
#include <set>

namespace tqd::cli {

namespace fs = std::filesystem;

namespace {

Json sampler_defaults() {
    const SamplerConfig s;
    return Json{{"kappa_base", s.kappa_base},
                {"kappa_max", s.kappa_max},
                {"min_shape", s.min_shape},
                {"batch_size", s.batch_size},
                {"max_rejection_attempts", s.max_rejection_attempts}};
}

Json generator_defaults() {
    const GeneratorOptions g;
    return Json{{"frames", g.shape.frames},   {"height", g.shape.height},       {"width", g.shape.width},
                {"square_size", g.square_size}, {"background", g.background}, {"foreground", g.foreground}};
}

Json trainer_defaults() {
    const TrainerConfig t;
    const ModelConfig& m = t.model;
    return Json{{"learning_rate", t.adam.learning_rate},
                {"beta1", t.adam.beta1},
                {"beta2", t.adam.beta2},
                {"epsilon", t.adam.epsilon},
                {"hidden1", m.hidden1},
                {"hidden2", m.hidden2},
                {"frequencies", m.frequencies},
                {"gated_skip", m.gated_skip},
                {"per_frame", m.per_frame},
                {"temporal_context", m.temporal_context},
                {"pixel_hidden", m.pixel_hidden},
                {"loss_window", 50},
                // held-out golden clips (fast, clean) scored after training
                {"eval_samples", 16},
                {"eval_speed", 2.0},
                {"eval_noise_draws", 4}};
}

Json probe_defaults() {
    Json degs = Json::array();
    for (const auto& d : default_probe_degradations()) {
        degs.push_back({{"kind", degradation_name(d.kind)}, {"strength", d.strength}});
    }
    Json grid = Json::array();
    for (double t : default_t_grid()) grid.push_back(t);
    return Json{{"n_samples", 40},   {"motion_speed", 2.0}, {"texture_noise", 0.0},
                {"n_noise", 16},     {"t_grid", grid},      {"degradations", degs},
                {"sweep", false}};
}

// Strength grid used when probe.sweep is set.
std::vector<DegradationSpec> sweep_degradations() {
    std::vector<DegradationSpec> out;
    for (double s : {1.0, 2.0, 3.0}) out.push_back({DegradationKind::Blur, s, 0});
    for (double s : {4.0, 8.0, 16.0}) out.push_back({DegradationKind::Compression, s, 0});
    for (double s : {0.05, 0.1, 0.2}) out.push_back({DegradationKind::Noise, s, 0});
    for (double s : {0.25, 0.5, 1.0}) out.push_back({DegradationKind::Shuffle, s, 0});
    return out;
}

template <typename T>
T get(const Json& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Usage, std::string("config key '") + key + "': " + e.what());
    }
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<Quadrant> parse_filter(const std::string& filter) {
    if (filter.empty()) return {};
    const auto eq = filter.find('=');
    if (eq == std::string::npos || filter.substr(0, eq) != "quadrant") {
        throw Error(ErrorKind::Usage, "filter must look like quadrant=HMLV,LMHV");
    }
    std::vector<Quadrant> out;
    std::string rest = filter.substr(eq + 1);
    std::size_t pos = 0;
    while (pos <= rest.size()) {
        const auto comma = std::min(rest.find(',', pos), rest.size());
        const std::string name = rest.substr(pos, comma - pos);
        const auto q = parse_quadrant(name);
        if (!q) throw Error(ErrorKind::Usage, "unknown quadrant '" + name + "'");
        out.push_back(*q);
        pos = comma + 1;
    }
    return out;
}

fs::path manifest_path(const Json& config) {
    const auto m = get<std::string>(config, "manifest");
    if (m.empty()) throw Error(ErrorKind::Usage, "--manifest is required");
    return m;
}

// Reads, optionally perturbs and normalizes the manifest, then applies the quadrant filter.
// Quadrants use median thresholds of the whole manifest, so filtering never moves them.
std::vector<QualityRecord> load_dataset(const Json& config, std::ostream& log) {
    auto records = read_manifest(manifest_path(config));
    if (records.empty()) throw Error(ErrorKind::Data, "manifest has no records");
    const double level = config.contains("noise_level") ? get<double>(config, "noise_level") : 0.0;
    if (level < 0.0) throw Error(ErrorKind::Usage, "noise level must be non-negative");
    if (level > 0.0) records = inject_score_noise(records, level, get<std::uint64_t>(config, "seed"));
    records = normalize_scores(records).records;

    const auto keep = parse_filter(config.contains("filter") ? get<std::string>(config, "filter") : "");
    if (keep.empty()) return records;
    const auto [mq_t, vq_t] = median_thresholds(records);
    std::vector<QualityRecord> out;
    for (auto& r : records) {
        if (std::find(keep.begin(), keep.end(), classify(r, mq_t, vq_t)) != keep.end()) out.push_back(std::move(r));
    }
    log << "filter kept " << out.size() << " records\n";
    if (out.empty()) throw Error(ErrorKind::Data, "no records left after filter");
    return out;
}

std::string slug(const DegradationSpec& d) {
    std::string s = format_double(d.strength);
    std::replace(s.begin(), s.end(), '.', 'p');
    return std::string(degradation_name(d.kind)) + "_" + s;
}

}  // namespace

Json default_config(const std::string& command) {
    Json c{{"command", command}, {"seed", 0}};
    if (command == "synth") {
        c["n"] = 1000;
        c["target_r"] = -0.22;
        const PopulationShape p;
        c["population"] = {{"mq_mean", p.mq_mean}, {"mq_std", p.mq_std}, {"vq_mean", p.vq_mean}, {"vq_std", p.vq_std}};
    } else if (command == "curate") {
        c["manifest"] = "";
        c["mq_threshold"] = nullptr;  // null = median
        c["vq_threshold"] = nullptr;
    } else if (command == "sample-stats") {
        c["manifest"] = "";
        c.update(sampler_defaults());
        c["n_draws"] = 100000;
        c["n_bins"] = 50;
        c["density_points"] = 199;
    } else if (command == "train") {
        c["manifest"] = "";
        c.update(sampler_defaults());
        c["steps"] = 500;
        c["baseline"] = false;
        c["filter"] = "";
        c["noise_level"] = 0.0;
        c["trainer"] = trainer_defaults();
        c["generator"] = generator_defaults();
    } else if (command == "probe") {
        c["checkpoint"] = "";
        c["probe"] = probe_defaults();
        c["generator"] = generator_defaults();
    } else {
        throw Error(ErrorKind::Usage, "unknown command '" + command + "'");
    }
    return c;
}

void merge_config(Json& base, const Json& patch, const std::string& where) {
    if (!patch.is_object()) throw Error(ErrorKind::Usage, where + ": expected a JSON object");
    for (const auto& [key, value] : patch.items()) {
        if (!base.contains(key)) throw Error(ErrorKind::Usage, where + ": unknown key '" + key + "'");
        auto& slot = base[key];
        if (slot.is_object() && value.is_object()) {
            merge_config(slot, value, where + "." + key);
        } else {
            slot = value;
        }
    }
}

SamplerConfig sampler_config_from(const Json& c) {
    SamplerConfig s;
    s.kappa_base = get<double>(c, "kappa_base");
    s.kappa_max = get<double>(c, "kappa_max");
    s.min_shape = get<double>(c, "min_shape");
    s.batch_size = get<std::size_t>(c, "batch_size");
    s.max_rejection_attempts = get<std::size_t>(c, "max_rejection_attempts");
    s.seed = get<std::uint64_t>(c, "seed");
    s.validate();
    return s;
}

GeneratorOptions generator_from(const Json& c) {
    const Json& g = c.at("generator");
    GeneratorOptions o;
    o.shape = {get<int>(g, "frames"), get<int>(g, "height"), get<int>(g, "width")};
    o.square_size = get<int>(g, "square_size");
    o.background = get<float>(g, "background");
    o.foreground = get<float>(g, "foreground");
    return o;
}

TrainerConfig trainer_config_from(const Json& c) {
    const Json& t = c.at("trainer");
    TrainerConfig tc;
    tc.steps = get<std::size_t>(c, "steps");
    tc.baseline = get<bool>(c, "baseline");
    tc.seed = get<std::uint64_t>(c, "seed");
    tc.adam = {get<double>(t, "learning_rate"), get<double>(t, "beta1"), get<double>(t, "beta2"),
               get<double>(t, "epsilon")};
    auto& m = tc.model;
    m.shape = generator_from(c).shape;
    m.hidden1 = get<int>(t, "hidden1");
    m.hidden2 = get<int>(t, "hidden2");
    m.frequencies = get<int>(t, "frequencies");
    m.gated_skip = get<bool>(t, "gated_skip");
    m.per_frame = get<bool>(t, "per_frame");
    m.temporal_context = get<int>(t, "temporal_context");
    m.pixel_hidden = get<int>(t, "pixel_hidden");
    m.seed = tc.seed;
    m.validate();
    return tc;
}

std::string run_id(const Json& config) { return io::hex64(io::fnv1a(config.dump())); }

fs::path prepare_run_dir(const Json& config, const fs::path& out_dir, std::ostream& log) {
    const fs::path dir = out_dir / run_id(config);
    const std::string text = config.dump(2) + "\n";
    io::write_text(dir / "config.json", text);
    log << text << "run dir: " << dir.string() << "\n";
    return dir;
}

// ---------------------------------------------------------------------------

int cmd_synth(const Json& config, const fs::path& out_dir, std::ostream& log) {
    const auto n = get<std::size_t>(config, "n");
    if (n < 3) throw Error(ErrorKind::Usage, "need at least 3 records");
    const Json& p = config.at("population");
    const PopulationShape shape{get<double>(p, "mq_mean"), get<double>(p, "mq_std"), get<double>(p, "vq_mean"),
                                get<double>(p, "vq_std")};
    const auto records =
        synth_population(n, get<double>(config, "target_r"), get<std::uint64_t>(config, "seed"), shape);
    const fs::path dir = prepare_run_dir(config, out_dir, log);
    write_manifest(dir / "manifest.jsonl", records);
    const auto stats = pearson_correlation(records);
    log << "wrote " << records.size() << " records, pearson r = " << stats.pearson_r << "\n";
    return 0;
}

int cmd_curate(const Json& config, const fs::path& out_dir, std::ostream& log) {
    const fs::path manifest = manifest_path(config);
    const auto records = read_manifest(manifest);
    if (records.empty()) throw Error(ErrorKind::Data, "manifest has no records");
    const auto norm = normalize_scores(records);
    std::optional<std::pair<double, double>> thresholds;
    const auto& mq_t = config.at("mq_threshold");
    const auto& vq_t = config.at("vq_threshold");
    if (mq_t.is_null() != vq_t.is_null()) throw Error(ErrorKind::Usage, "give both thresholds or neither");
    if (!mq_t.is_null()) thresholds = std::pair{mq_t.get<double>(), vq_t.get<double>()};
    const auto report = quadrant_report(norm.records, thresholds);

    const fs::path dir = prepare_run_dir(config, out_dir, log);
    const fs::path normalized = dir / "normalized.jsonl";
    write_manifest(normalized, norm.records);
    write_sidecar(sidecar_path_for(normalized), norm.constants);
    io::write_text(dir / "quadrants.json", report.to_json() + "\n");
    io::write_text(dir / "quadrants.txt", report.to_table());
    log << report.to_table();
    return 0;
}

int cmd_sample_stats(const Json& config, const fs::path& out_dir, std::ostream& log) {
    const auto sampler = sampler_config_from(config);
    const auto n_draws = get<std::size_t>(config, "n_draws");
    const auto n_bins = get<std::size_t>(config, "n_bins");
    const auto points = get<std::size_t>(config, "density_points");
    if (n_draws < 1000) throw Error(ErrorKind::Usage, "n_draws must be at least 1000");
    if (n_bins < 2) throw Error(ErrorKind::Usage, "n_bins must be at least 2");
    const auto records = normalize_scores(read_manifest(manifest_path(config))).records;
    if (records.empty()) throw Error(ErrorKind::Data, "manifest has no records");

    const fs::path dir = prepare_run_dir(config, out_dir, log);
    const auto report = timestep_histogram(records, sampler, n_draws, n_bins);
    io::write_text(dir / "histogram.csv", format_histogram_csv(report));

    // One density curve per quadrant present, using that quadrant's mean normalized scores.
    const auto [mq_t, vq_t] = median_thresholds(records);
    std::map<int, std::pair<std::pair<double, double>, std::size_t>> profiles;
    for (const auto& r : records) {
        auto& [sum, count] = profiles[static_cast<int>(classify(r, mq_t, vq_t))];
        sum.first += *r.mq_norm;
        sum.second += *r.vq_norm;
        ++count;
    }
    Json densities = Json::object();
    for (const auto& [q, entry] : profiles) {
        const auto& [sum, count] = entry;
        QualityRecord mean;
        mean.mq_norm = sum.first / static_cast<double>(count);
        mean.vq_norm = sum.second / static_cast<double>(count);
        const auto law = make_law(mean, sampler);
        std::string csv = "t,density\n";
        for (const auto& [t, d] : density_curve(law, points)) csv += format_double(t) + "," + format_double(d) + "\n";
        const std::string name(quadrant_name(static_cast<Quadrant>(q)));
        io::write_text(dir / ("density_" + name + ".csv"), csv);
        densities[name] = {{"records", count}, {"mu", law.mu}, {"kappa", law.kappa}, {"alpha", law.alpha},
                           {"beta", law.beta}};
    }

    double upper = 0.0;
    for (const auto& b : report.bins) upper += b.lo >= 0.5 ? b.observed : 0.0;
    const Json summary{{"n_draws", report.n_draws},
                       {"chi_square", report.chi_square.statistic},
                       {"dof", report.chi_square.dof},
                       {"p_value", report.chi_square.p_value},
                       {"ks_statistic", report.ks_statistic},
                       {"ks_critical", report.ks_critical},
                       {"fraction_above_half", upper / static_cast<double>(report.n_draws)},
                       {"passes", report.passes()},
                       {"profiles", densities}};
    io::write_text(dir / "report.json", summary.dump(2) + "\n");
    log << "chi-square p = " << report.chi_square.p_value << ", KS D = " << report.ks_statistic << " (critical "
        << report.ks_critical << "): " << (report.passes() ? "pass" : "FAIL") << "\n";
    return report.passes() ? 0 : static_cast<int>(ErrorKind::Numeric);
}

int cmd_train(const Json& config, const fs::path& out_dir, std::ostream& log) {
    const auto sampler = sampler_config_from(config);
    const auto trainer = trainer_config_from(config);
    const auto gen = generator_from(config);
    const Json& t = config.at("trainer");
    const auto records = load_dataset(config, log);
    const auto videos = resolve_videos(records, gen, manifest_path(config).parent_path());

    const fs::path dir = prepare_run_dir(config, out_dir, log);
    const TrainState state = train(records, videos, sampler, trainer);
    save_checkpoint(dir / "checkpoint.bin", Checkpoint{state.model, state.step, trainer.seed});
    io::write_text(dir / "loss.csv", format_train_log(state));

    const auto eval_videos =
        probe_samples(get<std::size_t>(t, "eval_samples"), get<double>(t, "eval_speed"), 0.0, trainer.seed + 1, gen);
    const auto grid = default_t_grid();
    const double eval =
        eval_videos.empty()
            ? 0.0
            : evaluate_loss(state.model, eval_videos, grid, trainer.seed + 2, get<std::size_t>(t, "eval_noise_draws"));
    const double tail = state.loss_history.empty() ? 0.0 : tail_mean_loss(state, get<std::size_t>(t, "loss_window"));
    const Json summary{{"steps", state.step},       {"records", records.size()}, {"baseline", trainer.baseline},
                       {"final_train_loss", tail}, {"eval_loss", eval}};
    io::write_text(dir / "summary.json", summary.dump(2) + "\n");
    log << "trained " << state.step << " steps: tail loss " << tail << ", held-out loss " << eval << "\n";
    return 0;
}

int cmd_probe(const Json& config, const fs::path& out_dir, std::ostream& log) {
    const auto path = get<std::string>(config, "checkpoint");
    if (path.empty()) throw Error(ErrorKind::Usage, "--checkpoint is required");
    const Json& p = config.at("probe");
    const auto gen = generator_from(config);
    const auto grid = get<std::vector<double>>(p, "t_grid");
    for (double t : grid) {
        if (!(t > 0.0 && t < 1.0)) throw Error(ErrorKind::Usage, "probe t_grid values must lie in (0, 1)");
    }
    const auto seed = get<std::uint64_t>(config, "seed");
    std::vector<DegradationSpec> degs;
    if (get<bool>(p, "sweep")) {
        degs = sweep_degradations();
    } else {
        for (const auto& d : p.at("degradations")) {
            const auto kind = parse_degradation(get<std::string>(d, "kind"));
            if (!kind) throw Error(ErrorKind::Usage, "unknown degradation '" + d.at("kind").dump() + "'");
            degs.push_back({*kind, get<double>(d, "strength"), 0});
        }
    }
    for (auto& d : degs) d.seed = seed;

    const Checkpoint ckpt = load_checkpoint(path);
    if (ckpt.model.config().shape != gen.shape) {
        throw Error(ErrorKind::Artifact, "checkpoint video shape does not match the generator shape");
    }
    const auto samples = probe_samples(get<std::size_t>(p, "n_samples"), get<double>(p, "motion_speed"),
                                       get<double>(p, "texture_noise"), seed, gen);
    if (samples.empty()) throw Error(ErrorKind::Usage, "probe needs at least one sample");

    const fs::path dir = prepare_run_dir(config, out_dir, log);
    const auto curves = gradient_probe(ckpt.model, samples, degs, grid, get<std::size_t>(p, "n_noise"), seed);
    Json summary = Json::array();
    for (const auto& c : curves) {
        const std::string name = "probe_" + slug(c.degradation) + ".csv";
        io::write_text(dir / name, format_probe_csv(c));
        Json pts = Json::array();
        for (const auto& [t, d] : c.points) pts.push_back({t, d});
        summary.push_back({{"kind", degradation_name(c.degradation.kind)},
                           {"strength", c.degradation.strength},
                           {"file", name},
                           {"n_samples", c.n_samples},
                           {"points", pts}});
        log << name << ":";
        for (const auto& [t, d] : c.points) log << " " << d;
        log << "\n";
    }
    io::write_text(dir / "probe_summary.json", summary.dump(2) + "\n");
    return 0;
}

// ---------------------------------------------------------------------------

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Timestep-aware quality decoupling: desk-scale harness"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    struct Flags {
        std::string config, out = "out", manifest, filter, checkpoint;
        std::uint64_t seed = 0;
        std::size_t steps = 0, n_draws = 0, n = 0;
        double noise_level = 0.0, target_r = 0.0;
        bool baseline = false;
    } f;
    std::map<std::string, CLI::Option*> given;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", f.config, "JSON config (an echoed config.json replays a run)");
        sub->add_option("--out", f.out, "output root; results land in <out>/<run-id>/");
        given["seed"] = sub->add_option("--seed", f.seed, "global seed");
    };
    auto* synth = app.add_subcommand("synth", "write a synthetic scored manifest");
    auto* curate = app.add_subcommand("curate", "normalize scores, quadrant report, correlation");
    auto* stats = app.add_subcommand("sample-stats", "timestep histogram and Beta density curves");
    auto* train_cmd = app.add_subcommand("train", "flow-matching training with TQD or the baseline law");
    auto* probe = app.add_subcommand("probe", "gradient distance under quality degradations");
    for (auto* sub : {synth, curate, stats, train_cmd, probe}) common(sub);
    for (auto* sub : {curate, stats, train_cmd}) {
        given[sub->get_name() + ".manifest"] = sub->add_option("--manifest", f.manifest, "score manifest (JSONL)");
    }
    given["n"] = synth->add_option("--n", f.n, "number of records");
    given["target_r"] = synth->add_option("--target-r", f.target_r, "target Pearson correlation of (mq, vq)");
    given["n_draws"] = stats->add_option("--n-draws", f.n_draws, "number of sampled timesteps");
    given["steps"] = train_cmd->add_option("--steps", f.steps, "optimizer steps");
    given["baseline"] = train_cmd->add_flag("--baseline", f.baseline, "no dropout, symmetric Beta(kappa_base) law");
    given["filter"] = train_cmd->add_option("--filter", f.filter, "e.g. quadrant=HMLV,LMHV");
    given["noise_level"] = train_cmd->add_option("--noise-level", f.noise_level, "score noise, fraction of range");
    given["checkpoint"] = probe->add_option("--checkpoint", f.checkpoint, "model checkpoint");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : static_cast<int>(ErrorKind::Usage);
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        const std::string command = sub->get_name();
        Json config = default_config(command);
        if (!f.config.empty()) {
            Json file;
            try {
                file = Json::parse(io::read_text(f.config));
            } catch (const nlohmann::json::parse_error& e) {
                throw Error(ErrorKind::Usage, f.config + ": " + e.what());
            }
            if (file.contains("command") && file["command"] != command) {
                throw Error(ErrorKind::Usage, f.config + " was written for '" + file["command"].get<std::string>() + "'");
            }
            merge_config(config, file, f.config);
        }
        auto was_given = [&](const std::string& key) {
            const auto it = given.find(key);
            return it != given.end() && it->second->count() > 0;
        };
        if (sub->get_option("--seed")->count() > 0) config["seed"] = f.seed;
        if (was_given(command + ".manifest")) config["manifest"] = fs::absolute(f.manifest).lexically_normal().string();
        if (command == "synth") {
            if (was_given("n")) config["n"] = f.n;
            if (was_given("target_r")) config["target_r"] = f.target_r;
        }
        if (command == "sample-stats" && was_given("n_draws")) config["n_draws"] = f.n_draws;
        if (command == "train") {
            if (was_given("steps")) config["steps"] = f.steps;
            if (f.baseline) config["baseline"] = true;
            if (was_given("filter")) config["filter"] = f.filter;
            if (was_given("noise_level")) config["noise_level"] = f.noise_level;
        }
        if (command == "probe" && was_given("checkpoint")) {
            config["checkpoint"] = fs::absolute(f.checkpoint).lexically_normal().string();
        }

        if (command == "synth") return cmd_synth(config, f.out, out);
        if (command == "curate") return cmd_curate(config, f.out, out);
        if (command == "sample-stats") return cmd_sample_stats(config, f.out, out);
        if (command == "train") return cmd_train(config, f.out, out);
        return cmd_probe(config, f.out, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const nlohmann::json::exception& e) {
        err << "error: config: " << e.what() << "\n";
        return static_cast<int>(ErrorKind::Usage);
    }
}

}  // namespace tqd::cli
