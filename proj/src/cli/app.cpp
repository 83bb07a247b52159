#include "smoothfair/cli/app.hpp"

#include <CLI11.hpp>

#include <Eigen/Core>
#include <filesystem>
#include <limits>
#include <ostream>
#include <set>

#include "smoothfair/audit/auditor.hpp"
#include "smoothfair/audit/bounds.hpp"
#include "smoothfair/data/csv.hpp"
#include "smoothfair/data/generators.hpp"
#include "smoothfair/data/split.hpp"
#include "smoothfair/errors.hpp"
#include "smoothfair/fairtrain/probe.hpp"
#include "smoothfair/fairtrain/sweep.hpp"
#include "smoothfair/fairtrain/trainer.hpp"
#include "smoothfair/numkit/serialize.hpp"

#ifndef SMOOTHFAIR_VERSION
#define SMOOTHFAIR_VERSION "0.0.0"
#endif

namespace smoothfair {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw SchemaError(where + ": expected an object");
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) throw SchemaError(where + ": unknown key '" + key + "'");
    }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw SchemaError(where + ": key '" + key + "' has the wrong type");
    }
}

ProbeSpec probe_from_json(const json& j) {
    check_keys(j, {"hidden", "lr", "epochs", "batch_size", "holdout", "validation"}, "probes[]");
    ProbeSpec p;
    p.hidden = get_or(j, "hidden", p.hidden, "probes[]");
    p.lr = get_or(j, "lr", p.lr, "probes[]");
    p.epochs = get_or(j, "epochs", p.epochs, "probes[]");
    p.batch_size = get_or(j, "batch_size", p.batch_size, "probes[]");
    p.holdout = get_or(j, "holdout", p.holdout, "probes[]");
    p.validation = get_or(j, "validation", p.validation, "probes[]");
    return p;
}

json probe_to_json(const ProbeSpec& p) {
    return {{"hidden", p.hidden}, {"lr", p.lr}, {"epochs", p.epochs}, {"batch_size", p.batch_size}, {"holdout", p.holdout}, {"validation", p.validation}};
}

ProbeTarget target_from_string(const std::string& s) {
    if (s == "sensitive") return ProbeTarget::sensitive;
    if (s == "label") return ProbeTarget::task_label;
    throw SchemaError("unknown probe target '" + s + "' (expected sensitive or label)");
}

std::vector<std::size_t> parse_widths(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        try {
            std::size_t used = 0;
            const long v = std::stol(part, &used);
            if (used != part.size() || v <= 0) throw std::invalid_argument(part);
            out.push_back(static_cast<std::size_t>(v));
        } catch (const std::exception&) {
            throw SchemaError("bad layer width list '" + text + "'");
        }
    }
    return out;
}

json read_json_file(const fs::path& path) {
    try {
        return json::parse(read_text(path));
    } catch (const json::parse_error& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
}

struct DataSplits {
    Dataset train;
    Dataset test;
};

DataSplits load_data(const json& d) {
    check_keys(d, {"train", "test", "source", "raw", "sensitive", "label", "drop", "test_fraction", "split_seed"}, "data");
    const bool raw = get_or(d, "raw", false, "data");
    auto read = [&](const std::string& path) {
        if (!raw) return read_dataset_csv(path);
        CsvOptions o;
        o.sensitive_column = get_or<std::string>(d, "sensitive", "", "data");
        if (o.sensitive_column.empty()) throw SchemaError("data: raw tables need a 'sensitive' column name");
        if (d.contains("label")) o.label_column = get_or<std::string>(d, "label", "", "data");
        o.drop_columns = get_or(d, "drop", std::vector<std::string>{}, "data");
        return load_csv(path, o);
    };
    if (d.contains("source")) {
        if (d.contains("train") || d.contains("test")) throw SchemaError("data: give either source or train/test, not both");
        const double f = get_or(d, "test_fraction", 0.3, "data");
        if (!(f > 0.0 && f < 1.0)) throw SchemaError("data: test_fraction must lie in (0, 1)");
        auto parts = split(read(get_or<std::string>(d, "source", "", "data")),
                           {{1.0 - f, f}, get_or<std::uint64_t>(d, "split_seed", 0, "data")});
        return {std::move(parts.parts[0]), std::move(parts.parts[1])};
    }
    if (!d.contains("train") || !d.contains("test")) throw SchemaError("data: need source, or both train and test");
    if (raw) throw SchemaError("data: raw tables must come as one source so both splits share one scaling");
    return {read(get_or<std::string>(d, "train", "", "data")), read(get_or<std::string>(d, "test", "", "data"))};
}

json versions() {
    return {{"smoothfair", SMOOTHFAIR_VERSION},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"compiler", __VERSION__}};
}

void write_json(const fs::path& path, const json& j) { write_text_atomic(path, j.dump(2) + "\n"); }

/// Options shared by commands that train: --config plus overrides.
struct TrainFlags {
    std::string config_path;
    std::string train_path, test_path, source_path, sensitive, label;
    bool raw = false;
    double test_fraction = 0.3;
    std::uint64_t split_seed = 0;
    std::string method;
    double lambda = 0, sigma = 0, lr = 0, adversary_lr = 0;
    std::size_t epochs = 0, batch_size = 0, m = 0, latent_dim = 0;
    std::uint64_t seed = 0;

    std::map<std::string, CLI::Option*> opts;

    void add(CLI::App* cmd) {
        opts["config"] = cmd->add_option("--config", config_path, "Experiment config JSON");
        opts["train"] = cmd->add_option("--train", train_path, "Training split (dataset CSV)");
        opts["test"] = cmd->add_option("--test", test_path, "Test split (dataset CSV)");
        opts["source"] = cmd->add_option("--data", source_path, "Single table to split into train and test");
        opts["raw"] = cmd->add_flag("--raw", raw, "--data is a raw table (one-hot, min-max scaled)");
        opts["sensitive"] = cmd->add_option("--sensitive", sensitive, "Sensitive column of a raw table");
        opts["label"] = cmd->add_option("--label", label, "Task label column of a raw table");
        opts["test_fraction"] = cmd->add_option("--test-fraction", test_fraction, "Share of --data held out")->check(CLI::Range(0.0, 1.0));
        opts["split_seed"] = cmd->add_option("--split-seed", split_seed);
        opts["method"] = cmd->add_option("--method", method, "awgn, adv_ce, adv_l1 or plain");
        opts["lambda"] = cmd->add_option("--lambda", lambda);
        opts["sigma"] = cmd->add_option("--sigma", sigma);
        opts["lr"] = cmd->add_option("--lr", lr);
        opts["adversary_lr"] = cmd->add_option("--adversary-lr", adversary_lr);
        opts["epochs"] = cmd->add_option("--epochs", epochs);
        opts["batch_size"] = cmd->add_option("--batch-size", batch_size);
        opts["m"] = cmd->add_option("--mc-draws", m, "Monte-Carlo draws per query point");
        opts["latent_dim"] = cmd->add_option("--latent-dim", latent_dim);
        opts["seed"] = cmd->add_option("--seed", seed);
    }

    bool given(const std::string& key) const { return opts.at(key)->count() > 0; }

    /// Config file with flags applied on top; validated.
    json resolve() const {
        json cfg = config_path.empty() ? json::object() : read_json_file(config_path);
        if (!cfg.is_object()) throw SchemaError("config: expected an object");
        json& t = cfg["train"];
        if (t.is_null()) t = json::object();
        if (given("method")) t["method"] = method;
        if (given("lambda")) t["lambda"] = lambda;
        if (given("sigma")) t["sigma"] = sigma;
        if (given("lr")) t["lr"] = lr;
        if (given("adversary_lr")) t["adversary_lr"] = adversary_lr;
        if (given("epochs")) t["epochs"] = epochs;
        if (given("batch_size")) t["batch_size"] = batch_size;
        if (given("m")) t["m"] = m;
        if (given("latent_dim")) t["latent_dim"] = latent_dim;
        if (given("seed")) t["seed"] = seed;
        json& d = cfg["data"];
        if (d.is_null()) d = json::object();
        if (given("train") || given("test") || given("source")) {
            for (const char* k : {"train", "test", "source"}) d.erase(k);
        }
        if (given("train")) d["train"] = train_path;
        if (given("test")) d["test"] = test_path;
        if (given("source")) d["source"] = source_path;
        if (given("raw")) d["raw"] = raw;
        if (given("sensitive")) d["sensitive"] = sensitive;
        if (given("label")) d["label"] = label;
        if (given("test_fraction")) d["test_fraction"] = test_fraction;
        if (given("split_seed")) d["split_seed"] = split_seed;
        validate_experiment_config(cfg);
        cfg["train"] = to_json(train_config_from_json(cfg["train"]));
        return cfg;
    }
};

void write_manifest(const fs::path& out, const std::string& command, const std::vector<std::string>& args, const json& config) {
    json m{{"command", command},
           {"argv", args},
           {"config", config},
           {"versions", versions()},
           {"timestamp", utc_timestamp()}};
    if (config.contains("train") && config["train"].contains("seed")) m["seed"] = config["train"]["seed"];
    write_json(out / "manifest.json", m);
}

std::string shown(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

void validate_experiment_config(const json& c) {
    check_keys(c, {"train", "data", "probes", "sweep", "sigma_grid", "sigma_tolerance"}, "config");
    if (c.contains("train")) {
        const auto cfg = train_config_from_json(c["train"]);
        cfg.validate();
    }
    if (c.contains("data")) {
        check_keys(c["data"], {"train", "test", "source", "raw", "sensitive", "label", "drop", "test_fraction", "split_seed"},
                   "data");
    }
    if (c.contains("probes")) {
        if (!c["probes"].is_array()) throw SchemaError("probes: expected an array");
        for (const auto& p : c["probes"]) probe_from_json(p);
    }
    if (c.contains("sweep")) {
        const auto& s = c["sweep"];
        check_keys(s, {"methods", "lambdas", "repeats", "target", "decoder_prefix", "jobs", "overrides"}, "sweep");
        for (const auto& m : get_or(s, "methods", std::vector<std::string>{}, "sweep")) method_from_string(m);
        get_or(s, "lambdas", std::vector<double>{}, "sweep");
        get_or<std::size_t>(s, "repeats", 1, "sweep");
        get_or<std::size_t>(s, "jobs", 1, "sweep");
        get_or(s, "decoder_prefix", false, "sweep");
        target_from_string(get_or<std::string>(s, "target", "label", "sweep"));
        if (s.contains("overrides")) {
            check_keys(s["overrides"], {"awgn", "adv_ce", "adv_l1", "plain"}, "sweep.overrides");
            for (const auto& [k, v] : s["overrides"].items()) {
                TrainConfig t;
                merge_train_config(t, v);
            }
        }
    }
    if (c.contains("sigma_grid")) get_or(c, "sigma_grid", std::vector<double>{}, "config");
    if (c.contains("sigma_tolerance")) get_or(c, "sigma_tolerance", 0.02, "config");
}

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Fair representations with a Gaussian channel: training, auditing and bounds", "smoothfair"};
    app.require_subcommand(1);
    std::string out_dir;

    // gen
    auto* gen = app.add_subcommand("gen", "Generate a dataset");
    std::string kind;
    std::size_t n = 1000, atoms = 10000, truncation = 100;
    std::uint64_t gen_seed = 0;
    double noise = 0.0, b = -1.0, missing = 0.01, side = kDefaultRollSide;
    std::vector<double> shift{kDefaultRollShift.begin(), kDefaultRollShift.end()};
    gen->add_option("kind", kind, "swiss-roll, atoms, staircase or income")
        ->required()
        ->check(CLI::IsMember({"swiss-roll", "atoms", "staircase", "income"}));
    gen->add_option("--n", n, "Rows")->check(CLI::PositiveNumber);
    gen->add_option("--seed", gen_seed);
    gen->add_option("--noise", noise, "Swiss roll: isotropic noise sd");
    gen->add_option("--shift", shift, "Swiss roll: group-1 translation")->expected(3);
    gen->add_option("--side", side, "Swiss roll: side of the feature cube");
    gen->add_option("--atoms", atoms, "Atom family: K");
    gen->add_option("--b", b, "Atom family: fraction whose digits set S (random when omitted)");
    gen->add_option("--truncation", truncation, "Staircase: K_trunc");
    gen->add_option("--missing-rate", missing, "Income: share of blank cells");
    gen->add_option("--out", out_dir, "Output directory")->required();

    // train
    auto* train = app.add_subcommand("train", "Train a representation (awgn, adv_ce, adv_l1, plain)");
    TrainFlags train_flags;
    train_flags.add(train);
    train->add_option("--out", out_dir)->required();

    // audit
    auto* audit = app.add_subcommand("audit", "Empirical certificate of a representation file");
    std::string reps_path, eval_path, mode = "loo", split_tag = "reps";
    double audit_sigma = 0.0, tinf = -1.0;
    std::uint64_t audit_seed = 0;
    bool clean = false;
    audit->add_option("--reps", reps_path, "Representations (dataset CSV)")->required();
    audit->add_option("--sigma", audit_sigma)->required()->check(CLI::PositiveNumber);
    audit->add_option("--mode", mode, "loo or held-out")->check(CLI::IsMember({"loo", "held-out"}));
    audit->add_option("--eval", eval_path, "Evaluation rows for held-out mode");
    audit->add_option("--seed", audit_seed, "Seed of the query noise");
    audit->add_flag("--clean", clean, "Score queries without channel noise");
    audit->add_option("--tinf", tinf, "Encoder norm bound to attach (default: max row norm)");
    audit->add_option("--tag", split_tag, "Split tag in the report");
    audit->add_option("--out", out_dir);

    // probe
    auto* probe = app.add_subcommand("probe", "Train a downstream classifier on a model's representations");
    std::string model_dir, probe_data, target = "sensitive", hidden = "32,32,32,32";
    ProbeSpec probe_spec;
    std::uint64_t encode_seed = 0;
    bool decoder_prefix = false, probe_clean = false;
    probe->add_option("--model", model_dir, "Model bundle directory")->required();
    probe->add_option("--data", probe_data, "Rows to encode (dataset CSV)")->required();
    probe->add_option("--target", target)->check(CLI::IsMember({"sensitive", "label"}));
    probe->add_option("--hidden", hidden, "Hidden widths, comma separated");
    probe->add_option("--epochs", probe_spec.epochs);
    probe->add_option("--lr", probe_spec.lr);
    probe->add_option("--batch-size", probe_spec.batch_size);
    probe->add_option("--holdout", probe_spec.holdout);
    probe->add_option("--validation", probe_spec.validation, "Share of fitting rows used for early stopping");
    probe->add_option("--seed", probe_spec.seed);
    probe->add_option("--encode-seed", encode_seed, "Seed of the fresh channel noise");
    probe->add_flag("--decoder-prefix", decoder_prefix, "Feed the decoder's hidden features to the probe");
    probe->add_flag("--clean", probe_clean, "Encode without channel noise");
    probe->add_option("--out", out_dir)->required();

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Pareto sweep over methods and lambda");
    TrainFlags sweep_flags;
    sweep_flags.add(sweep);
    std::vector<std::string> methods;
    std::vector<double> lambdas;
    std::size_t repeats = 1, jobs = 1, probe_epochs = 0;
    std::vector<std::string> probe_hidden;
    std::string sweep_target;
    bool sweep_prefix = false;
    auto* o_methods = sweep->add_option("--methods", methods)->delimiter(',');
    auto* o_lambdas = sweep->add_option("--lambdas", lambdas)->delimiter(',');
    auto* o_repeats = sweep->add_option("--repeats", repeats);
    auto* o_jobs = sweep->add_option("--jobs", jobs);
    auto* o_probe_hidden = sweep->add_option("--probe-hidden", probe_hidden, "Probe widths, e.g. 32,32 (repeatable)");
    auto* o_probe_epochs = sweep->add_option("--probe-epochs", probe_epochs);
    auto* o_target = sweep->add_option("--target", sweep_target)->check(CLI::IsMember({"sensitive", "label"}));
    auto* o_prefix = sweep->add_flag("--decoder-prefix", sweep_prefix);
    sweep->add_option("--out", out_dir)->required();

    // bounds
    auto* bounds = app.add_subcommand("bounds", "Evaluate the certificate bounds");
    bool b_thm1 = false, b_cor = false, b_thm2 = false, b_thm3 = false, b_mc = false;
    std::string mi_text;
    std::size_t bn = 0, bn0 = 0, bn1 = 0, bm = 1;
    double eps = 0, mi0 = 0, mi1 = 0, btinf = 0, bsigma = 0;
    bounds->add_flag("--thm1", b_thm1, "Failure probability lower bound (1 - 1/I)^n");
    bounds->add_flag("--cor", b_cor, "Largest information compatible with failure gap eps");
    bounds->add_flag("--thm2", b_thm2, "Rate 2 (sqrt(I0/n0) + sqrt(I1/n1))");
    bounds->add_flag("--thm3", b_thm3, "Information cap exp(t^2/sigma^2), and the rate when n0, n1 are given");
    bounds->add_flag("--mc", b_mc, "Monte-Carlo loss MSE bound");
    bounds->add_option("--n", bn);
    bounds->add_option("--mi", mi_text, "Chi-square information (number or inf)");
    bounds->add_option("--eps", eps);
    auto* o_n0 = bounds->add_option("--n0", bn0);
    auto* o_n1 = bounds->add_option("--n1", bn1);
    bounds->add_option("--mi0", mi0);
    bounds->add_option("--mi1", mi1);
    bounds->add_option("--tinf", btinf);
    bounds->add_option("--sigma", bsigma);
    bounds->add_option("--m", bm);
    bounds->add_option("--out", out_dir);

    // sigma-select
    auto* sigsel = app.add_subcommand("sigma-select", "Pick sigma so train and test certificates agree");
    TrainFlags sig_flags;
    sig_flags.add(sigsel);
    std::vector<double> grid;
    double tolerance = 0.02;
    auto* o_grid = sigsel->add_option("--grid", grid, "Ascending sigma values")->delimiter(',');
    auto* o_tol = sigsel->add_option("--tolerance", tolerance);
    sigsel->add_option("--out", out_dir)->required();

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        const fs::path outp(out_dir);
        if (!out_dir.empty()) fs::create_directories(outp);

        if (gen->parsed()) {
            json cfg{{"kind", kind}, {"n", n}, {"seed", gen_seed}};
            if (kind == "swiss-roll") {
                cfg["noise"] = noise;
                cfg["shift"] = shift;
                cfg["side"] = side;
                write_csv(outp / "data.csv", generate_swiss_roll(n, {shift[0], shift[1], shift[2]}, noise, gen_seed, side));
            } else if (kind == "atoms") {
                cfg["atoms"] = atoms;
                Dataset ds;
                if (b >= 0.0) {
                    cfg["b"] = b;
                    ds = generate_atom_family(atoms, b, n, gen_seed);
                } else {
                    cfg["b"] = "random";
                    ds = generate_atom_family(atoms, BinaryFraction::random(derive_seed(gen_seed, 1), atoms), n, gen_seed);
                }
                write_csv(outp / "data.csv", ds);
            } else if (kind == "staircase") {
                cfg["truncation"] = truncation;
                write_csv(outp / "data.csv", generate_staircase(n, truncation, gen_seed));
            } else {
                cfg["missing_rate"] = missing;
                write_text_atomic(outp / "data.csv", synthetic_income_csv(n, gen_seed, missing));
            }
            write_manifest(outp, "gen", args, cfg);
            out << (outp / "data.csv").string() << "\n";
        } else if (train->parsed()) {
            const json cfg = train_flags.resolve();
            const auto data = load_data(cfg.value("data", json::object()));
            const auto model = train_model(train_config_from_json(cfg["train"]), data.train, data.test);
            save_model(model, outp / "model");
            write_csv(outp / "reps_train.csv", encode_fresh(model, data.train, false, 0));
            write_csv(outp / "reps_test.csv", encode_fresh(model, data.test, false, 0));
            const json report = model_report(model);
            write_json(outp / "report.json", report);
            write_manifest(outp, "train", args, cfg);
            out << shown(report);
        } else if (audit->parsed()) {
            const Dataset reps = read_dataset_csv(reps_path);
            CertificateOptions opt;
            opt.split_tag = split_tag;
            opt.ber.noisy_queries = !clean;
            opt.ber.seed = audit_seed;
            opt.t_inf = tinf >= 0.0 ? tinf : max_row_norm(reps.features);
            CertificateReport report;
            if (mode == "loo") {
                if (!eval_path.empty()) throw ArgumentError("audit: --eval only applies to held-out mode");
                report = empirical_certificate(reps.features, reps.sensitive, audit_sigma, opt);
            } else {
                if (eval_path.empty()) throw ArgumentError("audit: held-out mode needs --eval");
                const Dataset eval = read_dataset_csv(eval_path);
                const auto model = fit_mixture(reps.features, reps.sensitive, audit_sigma);
                report = empirical_certificate(model, eval.features, eval.sensitive, opt);
            }
            const json j = to_json(report);
            if (!out_dir.empty()) {
                write_json(outp / "certificate.json", j);
                json cfg = json::object();
                cfg["reps"] = reps_path;
                cfg["eval"] = eval_path;
                cfg["sigma"] = audit_sigma;
                cfg["mode"] = mode;
                cfg["noisy_queries"] = !clean;
                cfg["seed"] = audit_seed;
                cfg["t_inf"] = *opt.t_inf;
                write_manifest(outp, "audit", args, cfg);
            }
            out << shown(j);
        } else if (probe->parsed()) {
            const auto model = load_model(model_dir);
            const Dataset ds = read_dataset_csv(probe_data);
            const bool noisy = model.config.method == Method::awgn && !probe_clean;
            const Dataset reps = encode_fresh(model, ds, noisy, encode_seed);
            probe_spec.hidden = parse_widths(hidden);
            const auto prefix = decoder_prefix ? std::optional<NetworkParams>(decoder_features(model.decoder)) : std::nullopt;
            const auto r = train_probe(reps, target_from_string(target), probe_spec, prefix);
            json j{{"target", target},
                   {"probe_arch", probe_spec.name()},
                   {"decoder_prefix", decoder_prefix},
                   {"measured_delta", r.measured_delta},
                   {"accuracy", r.accuracy},
                   {"certificate", model.train_certificate.delta_n},
                   {"gap", r.measured_delta - model.train_certificate.delta_n}};
            write_json(outp / "probe.json", j);
            write_text_atomic(outp / "probe_head.json", network_to_json(r.head).dump());
            json cfg{{"model", model_dir}, {"data", probe_data}, {"probe", probe_to_json(probe_spec)},
                     {"seed", probe_spec.seed}, {"encode_seed", encode_seed}, {"noisy", noisy}, {"target", target}};
            write_manifest(outp, "probe", args, cfg);
            out << shown(j);
        } else if (sweep->parsed()) {
            json cfg = sweep_flags.resolve();
            json& s = cfg["sweep"];
            if (s.is_null()) s = json::object();
            if (o_methods->count()) s["methods"] = methods;
            if (o_lambdas->count()) s["lambdas"] = lambdas;
            if (o_repeats->count()) s["repeats"] = repeats;
            if (o_jobs->count()) s["jobs"] = jobs;
            if (o_target->count()) s["target"] = sweep_target;
            if (o_prefix->count()) s["decoder_prefix"] = sweep_prefix;
            if (o_probe_hidden->count()) {
                cfg["probes"] = json::array();
                for (const auto& h : probe_hidden) cfg["probes"].push_back({{"hidden", parse_widths(h)}});
            }
            if (o_probe_epochs->count()) {
                if (!cfg.contains("probes")) cfg["probes"] = json::array({json::object()});
                for (auto& p : cfg["probes"]) p["epochs"] = probe_epochs;
            }
            validate_experiment_config(cfg);

            SweepOptions o;
            const TrainConfig base = train_config_from_json(cfg["train"]);
            for (const auto& m : get_or(s, "methods", std::vector<std::string>{"awgn", "adv_ce", "adv_l1"}, "sweep")) {
                TrainConfig t = base;
                t.method = method_from_string(m);
                if (s.contains("overrides") && s["overrides"].contains(m)) merge_train_config(t, s["overrides"][m]);
                o.methods.push_back(t);
            }
            o.lambda_grid = get_or(s, "lambdas", std::vector<double>{0, 1, 2, 3, 4}, "sweep");
            for (const auto& p : cfg.value("probes", json::array({json::object()}))) o.probes.push_back(probe_from_json(p));
            o.repeats = get_or<std::size_t>(s, "repeats", 1, "sweep");
            o.jobs = get_or<std::size_t>(s, "jobs", 1, "sweep");
            o.target = target_from_string(get_or<std::string>(s, "target", "label", "sweep"));
            o.decoder_prefix = get_or(s, "decoder_prefix", false, "sweep");
            o.master_seed = base.seed;
            const auto data = load_data(cfg.value("data", json::object()));
            const auto rows = pareto_sweep(o, data.train, data.test);
            write_text_atomic(outp / "sweep.csv", sweep_csv(rows));
            write_text_atomic(outp / "bins.csv", bin_summary_csv(bin_summary(rows)));
            write_manifest(outp, "sweep", args, cfg);
            out << (outp / "sweep.csv").string() << "\n";
        } else if (bounds->parsed()) {
            const int chosen = int(b_thm1) + int(b_cor) + int(b_thm2) + int(b_thm3) + int(b_mc);
            if (chosen != 1) throw ArgumentError("bounds: choose exactly one of --thm1, --cor, --thm2, --thm3, --mc");
            json j;
            if (b_thm1) {
                if (mi_text.empty()) throw ArgumentError("bounds --thm1: need --mi");
                Information mi = Information::divergent();
                if (mi_text != "inf") {
                    try {
                        mi = Information(std::stod(mi_text));
                    } catch (const std::logic_error&) {
                        throw ArgumentError("bounds: --mi must be a number or inf");
                    }
                }
                j["lower_bound"] = thm1_lower_bound(bn, mi);
            } else if (b_cor) {
                j["mi_cap"] = cor_rates_mi_cap(eps, bn);
            } else if (b_thm2) {
                j["rate_bound"] = thm2_rate_bound(bn0, bn1, mi0, mi1);
            } else if (b_thm3) {
                j["mi_cap"] = thm3_mi_cap(btinf, bsigma);
                if (o_n0->count() || o_n1->count()) j["rate_bound"] = thm3_rate_bound(btinf, bsigma, bn0, bn1);
            } else {
                j["mse_bound"] = mc_mse_bound(btinf, bsigma, bn, bm);
            }
            if (!out_dir.empty()) {
                write_json(outp / "bounds.json", j);
                write_manifest(outp, "bounds", args, json{{"argv", args}});
            }
            out << j.dump() << "\n";
        } else if (sigsel->parsed()) {
            json cfg = sig_flags.resolve();
            if (o_grid->count()) cfg["sigma_grid"] = grid;
            if (o_tol->count()) cfg["sigma_tolerance"] = tolerance;
            if (!cfg.contains("sigma_grid")) cfg["sigma_grid"] = {0.0316227766, 0.1, 0.316227766, 0.547722558};
            if (!cfg.contains("sigma_tolerance")) cfg["sigma_tolerance"] = 0.02;
            validate_experiment_config(cfg);
            const auto data = load_data(cfg.value("data", json::object()));
            const auto sel = select_sigma(train_config_from_json(cfg["train"]), data.train, data.test,
                                          cfg["sigma_grid"].get<std::vector<double>>(), cfg["sigma_tolerance"].get<double>());
            json j{{"sigma", sel.sigma}, {"within_tolerance", sel.within_tolerance}, {"diagnostics", json::array()}};
            std::string csv = "sigma,sigma_sq,delta_train,delta_test,gap\n";
            for (const auto& d : sel.diagnostics) {
                j["diagnostics"].push_back({{"sigma", d.sigma}, {"delta_train", d.delta_train}, {"delta_test", d.delta_test}, {"gap", d.gap}});
                csv += format_csv_row({format_double(d.sigma), format_double(d.sigma * d.sigma), format_double(d.delta_train),
                                       format_double(d.delta_test), format_double(d.gap)}) +
                       "\n";
            }
            write_json(outp / "sigma.json", j);
            write_text_atomic(outp / "sigma.csv", csv);
            write_manifest(outp, "sigma-select", args, cfg);
            out << shown(j);
        }
        return kExitOk;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const json::exception& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const SchemaError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const StateError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace smoothfair
