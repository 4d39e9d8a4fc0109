#include "krclust/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "krclust/baselines.hpp"
#include "krclust/datagen.hpp"
#include "krclust/design.hpp"
#include "krclust/federated.hpp"
#include "krclust/io.hpp"
#include "krclust/krkmeans.hpp"
#include "krclust/metrics.hpp"

namespace krclust::cli {

namespace {

using json = nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;

std::size_t thread_cap() {
    std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("KRCLUST_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v >= 1) threads = std::min<std::size_t>(threads, static_cast<std::size_t>(v));
        } catch (const std::exception&) {
            throw ConfigError("KRCLUST_THREADS must be a positive integer");
        }
    }
    return threads;
}

InitMethod parse_init(const std::string& s) {
    if (s == "random") return InitMethod::Random;
    if (s == "plusplus") return InitMethod::PlusPlus;
    throw ConfigError("unknown init '" + s + "'");
}

StorageMode parse_storage(const std::string& s) {
    if (s == "mem") return StorageMode::MemoryEfficient;
    if (s == "time") return StorageMode::TimeEfficient;
    throw ConfigError("unknown storage mode '" + s + "'");
}

struct FitKnobs {
    std::vector<std::size_t> h;
    std::string agg = "sum";
    std::size_t kmeans = 0;
    bool naive = false;
    std::size_t restarts = 20;
    std::size_t max_iter = 200;
    double tol = 1e-4;
    std::uint64_t seed = 0;
    std::string init = "random";
    std::string storage = "mem";
};

void add_fit_knobs(CLI::App* app, FitKnobs& k) {
    app->add_option("--h", k.h, "Protocentroid set cardinalities, comma separated")->delimiter(',');
    app->add_option("--agg", k.agg, "Aggregator")->check(CLI::IsMember({"sum", "product"}));
    app->add_option("--kmeans", k.kmeans, "Run standard k-Means with K centroids instead");
    app->add_flag("--naive", k.naive, "Two-phase baseline: k-Means with h1*h2 centroids, then decompose");
    app->add_option("--restarts", k.restarts, "Random restarts (best inertia wins)");
    app->add_option("--max-iter", k.max_iter, "Iteration cap per restart");
    app->add_option("--tol", k.tol, "Centroid-movement tolerance");
    app->add_option("--seed", k.seed, "Random seed");
    app->add_option("--init", k.init, "Initialization")->check(CLI::IsMember({"random", "plusplus"}));
    app->add_option("--storage", k.storage, "Centroid storage mode")->check(CLI::IsMember({"mem", "time"}));
}

json knobs_json(const FitKnobs& k) {
    return json{{"h", k.h},           {"agg", k.agg},         {"kmeans", k.kmeans}, {"naive", k.naive},
                {"restarts", k.restarts}, {"max_iter", k.max_iter}, {"tol", k.tol},       {"init", k.init},
                {"storage", k.storage}};
}

struct Fitted {
    ProtoSets model;
    Assignment assignment;
    double inertia = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    std::size_t restart_index = 0;
    ParamReport params;
    std::string method;
};

Fitted fit_model(const Dataset& data, const FitKnobs& k) {
    const std::size_t threads = thread_cap();
    if (k.kmeans > 0) {
        if (!k.h.empty() || k.naive) throw ConfigError("--kmeans cannot be combined with --h or --naive");
        LloydConfig cfg;
        cfg.k = k.kmeans;
        cfg.max_iter = k.max_iter;
        cfg.tol = k.tol;
        cfg.n_restarts = k.restarts;
        cfg.seed = k.seed;
        cfg.init = parse_init(k.init);
        cfg.threads = threads;
        auto r = lloyd_fit(data, cfg);
        const std::vector<std::size_t> card{k.kmeans};
        return Fitted{ProtoSets({std::move(r.centroids)}, Aggregator::Sum),
                      std::move(r.assignment),
                      r.inertia,
                      r.iterations,
                      r.converged,
                      r.restart_index,
                      param_report(card, data.dim(), ModelKind::Lloyd),
                      "kmeans"};
    }
    if (k.h.empty()) throw ConfigError("either --h or --kmeans is required");
    const Aggregator agg = parse_aggregator(k.agg);
    if (k.naive) {
        NaiveConfig cfg;
        cfg.cardinalities = k.h;
        cfg.aggregator = agg;
        cfg.inner.max_iter = k.max_iter;
        cfg.inner.tol = k.tol;
        cfg.inner.n_restarts = k.restarts;
        cfg.inner.seed = k.seed;
        cfg.inner.init = parse_init(k.init);
        cfg.inner.threads = threads;
        auto r = naive_fit(data, cfg);
        return Fitted{std::move(r.protosets), std::move(r.assignment), r.inertia, r.iterations, r.converged,
                      r.restart_index, param_report(k.h, data.dim(), ModelKind::KhatriRao), "naive"};
    }
    FitConfig cfg;
    cfg.cardinalities = k.h;
    cfg.aggregator = agg;
    cfg.max_iter = k.max_iter;
    cfg.tol = k.tol;
    cfg.n_restarts = k.restarts;
    cfg.seed = k.seed;
    cfg.init = parse_init(k.init);
    cfg.storage = parse_storage(k.storage);
    cfg.threads = threads;
    auto r = fit(data, cfg);
    return Fitted{std::move(r.protosets), std::move(r.assignment), r.inertia, r.iterations, r.converged,
                  r.restart_index, param_report(k.h, data.dim(), ModelKind::KhatriRao), "khatri_rao"};
}

json params_json(const ParamReport& p) {
    return json{{"model_kind", std::string(to_string(p.model_kind))},
                {"vector_count", p.vector_count},
                {"scalar_count", p.scalar_count},
                {"represented_centroids", p.represented_centroids},
                {"ratio_vs_full", p.ratio_vs_full}};
}

json label_metrics(Labels predicted, Labels truth) {
    json m{{"purity", purity(predicted, truth)}, {"nmi", nmi(predicted, truth)}, {"acc", acc(predicted, truth)}};
    if (predicted.size() >= 2) m["ari"] = ari(predicted, truth);
    return m;
}

std::vector<std::int64_t> as_labels(const std::vector<std::size_t>& cells) {
    return std::vector<std::int64_t>(cells.begin(), cells.end());
}

// Shared report skeleton; wall time is only recorded on request so that
// identical commands produce identical reports.
struct Report {
    json doc;
    std::optional<std::string> path;
    bool timing = false;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    Report(const std::vector<std::string>& args, const std::string& command) {
        doc["schema_version"] = kSchemaVersion;
        doc["command"] = command;
        doc["argv"] = args;
    }

    void write() {
        const double ms =
            timing ? std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count() : 0.0;
        doc["wall_time_ms"] = ms;
        if (!path) return;
        std::ofstream out(*path);
        if (!out) throw Error("cannot open report '" + *path + "' for writing");
        out << doc.dump(2) << '\n';
    }
};

void add_report_flags(CLI::App* app, std::string& report_path, bool& timing) {
    app->add_option("--report", report_path, "Write a JSON run report to PATH");
    app->add_flag("--timing", timing, "Record wall time in the report");
}

Dataset load_dataset(const std::string& path, bool labels, bool header, bool standardize_flag) {
    CsvOptions opts;
    opts.has_header = header;
    if (labels) {
        // Label column is the last one; peek at the width first.
        std::ifstream in(path);
        if (!in) throw ParseError("cannot open '" + path + "' for reading");
        std::string line;
        if (header) std::getline(in, line);
        while (std::getline(in, line) && line.find_first_not_of(" \t\r") == std::string::npos) {
        }
        const std::size_t width = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
        opts.label_column = width - 1;
    }
    Dataset data = read_csv(path, opts);
    return standardize_flag ? standardize(data) : data;
}

int cmd_gen(const std::vector<std::string>& args, std::ostream& out, const std::string& type, const BlobSpec& blobs,
            const KrStructSpec& kr_in, const std::string& agg, const std::string& sampler, const std::string& output,
            const std::string& model_out, const std::string& report_path, bool timing) {
    Report report(args, "gen");
    if (!report_path.empty()) report.path = report_path;
    report.timing = timing;
    Dataset data;
    json cfg;
    if (type == "blobs") {
        data = gen_blobs(blobs);
        cfg = {{"type", type}, {"n", blobs.n}, {"m", blobs.m}, {"k", blobs.k}, {"std", blobs.cluster_std}};
        report.doc["seed"] = blobs.seed;
    } else {
        KrStructSpec kr = kr_in;
        kr.aggregator = parse_aggregator(agg);
        kr.sampler = sampler == "positive" ? ProtoSampler::UniformPositive : ProtoSampler::StandardNormal;
        auto generated = gen_kr_structured(kr);
        data = std::move(generated.data);
        if (!model_out.empty()) write_model(model_out, generated.protosets);
        cfg = {{"type", type},     {"h", kr.cardinalities}, {"agg", agg},
               {"m", kr.m},        {"points_per_cluster", kr.points_per_cluster},
               {"noise", kr.noise_std}, {"sampler", sampler}};
        report.doc["seed"] = kr.seed;
    }
    write_csv(output, data);
    report.doc["config"] = cfg;
    report.doc["outputs"] = json{{"data", output}};
    if (!model_out.empty()) report.doc["outputs"]["model"] = model_out;
    out << "wrote " << data.size() << " points (m=" << data.dim() << ") to " << output << '\n';
    report.write();
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Khatri-Rao centroid clustering toolkit"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    // gen
    auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset (CSV, labels in the last column)");
    std::string gen_type = "blobs", gen_agg = "sum", gen_sampler = "normal", gen_output, gen_model, gen_report;
    bool gen_timing = false;
    BlobSpec blobs;
    KrStructSpec kr;
    std::uint64_t gen_seed = 0;
    gen->add_option("--type", gen_type, "blobs or kr")->check(CLI::IsMember({"blobs", "kr"}));
    gen->add_option("--n", blobs.n, "Points (blobs)");
    gen->add_option("--m", blobs.m, "Dimension");
    gen->add_option("--k", blobs.k, "Clusters (blobs)");
    gen->add_option("--std", blobs.cluster_std, "Cluster standard deviation (blobs)");
    gen->add_option("--h", kr.cardinalities, "Cardinalities (kr)")->delimiter(',');
    gen->add_option("--agg", gen_agg, "Aggregator (kr)")->check(CLI::IsMember({"sum", "product"}));
    gen->add_option("--points-per-cluster", kr.points_per_cluster, "Points per cell (kr)");
    gen->add_option("--noise", kr.noise_std, "Noise standard deviation (kr)");
    gen->add_option("--sampler", gen_sampler, "Protocentroid sampler (kr)")->check(CLI::IsMember({"normal", "positive"}));
    gen->add_option("--seed", gen_seed, "Random seed");
    gen->add_option("--output", gen_output, "Output CSV")->required();
    gen->add_option("--protosets", gen_model, "Write the generating protocentroids (kr)");
    add_report_flags(gen, gen_report, gen_timing);

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "Fit Khatri-Rao k-Means (or a baseline) to a CSV dataset");
    FitKnobs fk;
    std::string fit_input, fit_output, fit_assign, fit_report;
    bool fit_labels = false, fit_header = false, fit_std = false, fit_tuples = false, fit_timing = false;
    fit_cmd->add_option("--input", fit_input, "Input CSV")->required();
    fit_cmd->add_flag("--labels", fit_labels, "Last CSV column holds ground-truth labels");
    fit_cmd->add_flag("--header", fit_header, "CSV has a header row");
    fit_cmd->add_flag("--standardize", fit_std, "Z-score every feature before fitting");
    fit_cmd->add_option("--output", fit_output, "Write the fitted model");
    fit_cmd->add_option("--assignments", fit_assign, "Write per-point flat cell indices");
    fit_cmd->add_flag("--tuples", fit_tuples, "Append protocentroid index tuples to the assignments");
    add_fit_knobs(fit_cmd, fk);
    add_report_flags(fit_cmd, fit_report, fit_timing);

    // eval
    auto* eval = app.add_subcommand("eval", "Score predicted labels and/or a model against data");
    std::string ev_pred, ev_truth, ev_input, ev_model, ev_assign, ev_report;
    bool ev_header = false, ev_labels = false, ev_timing = false;
    eval->add_option("--pred", ev_pred, "Predicted labels, one per line");
    eval->add_option("--truth", ev_truth, "Ground-truth labels, one per line");
    eval->add_option("--input", ev_input, "Dataset CSV (for inertia)");
    eval->add_flag("--labels", ev_labels, "Last CSV column holds labels");
    eval->add_flag("--header", ev_header, "CSV has a header row");
    eval->add_option("--model", ev_model, "Model file (for inertia)");
    eval->add_option("--assignments", ev_assign, "Assignment file (for inertia)");
    add_report_flags(eval, ev_report, ev_timing);

    // design
    auto* design = app.add_subcommand("design", "Design-choice calculators");
    std::optional<std::size_t> balanced, optimal, bounds_k;
    std::size_t h_min = 2, param_m = 1;
    std::vector<std::size_t> param_h, hadamard;
    design->add_option("--balanced-pair", balanced, "Closest factor pair of K");
    design->add_option("--optimal-sets", optimal, "Best number of equal sets for a budget of B vectors");
    design->add_option("--set-bounds", bounds_k, "Bounds on the number of sets needed for K centroids");
    design->add_option("--h-min", h_min, "Minimum set cardinality for --set-bounds");
    design->add_option("--params", param_h, "Parameter accounting for cardinalities")->delimiter(',');
    design->add_option("--m", param_m, "Dimension for --params");
    design->add_option("--hadamard", hadamard, "d,m,r1,...,rq: Hadamard low-rank accounting")->delimiter(',');

    // quantize
    auto* quant = app.add_subcommand("quantize", "Colour quantization of a PPM image");
    FitKnobs qk;
    std::string q_input, q_output, q_report;
    std::size_t q_sample = 0, q_random = 0;
    bool q_timing = false;
    quant->add_option("--input", q_input, "Input PPM (P3/P6)")->required();
    quant->add_option("--output", q_output, "Output PPM (P6)")->required();
    quant->add_option("--sample", q_sample, "Fit on this many random pixels (0 = all)");
    quant->add_option("--random-codebook", q_random, "Baseline: codebook of K random pixels (best of --restarts)");
    add_fit_knobs(quant, qk);
    add_report_flags(quant, q_report, q_timing);

    // fed
    auto* fed = app.add_subcommand("fed", "Simulated federated k-Means / Khatri-Rao k-Means");
    std::string f_input, f_output, f_report, f_agg = "sum", f_init = "random";
    std::vector<std::size_t> f_h;
    std::size_t f_kmeans = 0, f_clients = 10, f_rounds = 15, f_bps = 8;
    std::uint64_t f_seed = 0;
    bool f_labels = false, f_header = false, f_std = false, f_timing = false;
    fed->add_option("--input", f_input, "Input CSV")->required();
    fed->add_flag("--labels", f_labels, "Last CSV column holds labels");
    fed->add_flag("--header", f_header, "CSV has a header row");
    fed->add_flag("--standardize", f_std, "Z-score every feature first");
    fed->add_option("--h", f_h, "Protocentroid cardinalities")->delimiter(',');
    fed->add_option("--kmeans", f_kmeans, "Federated standard k-Means with K centroids");
    fed->add_option("--agg", f_agg, "Aggregator")->check(CLI::IsMember({"sum", "product"}));
    fed->add_option("--clients", f_clients, "Number of clients");
    fed->add_option("--rounds", f_rounds, "Communication rounds");
    fed->add_option("--bytes-per-scalar", f_bps, "Bytes per transmitted scalar");
    fed->add_option("--init", f_init, "Initialization")->check(CLI::IsMember({"random", "plusplus"}));
    fed->add_option("--seed", f_seed, "Random seed");
    fed->add_option("--output", f_output, "Ledger CSV (round,s2c_bytes,c2s_bytes,inertia)");
    add_report_flags(fed, f_report, f_timing);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*gen) {
            blobs.seed = gen_seed;
            kr.seed = gen_seed;
            kr.m = blobs.m;
            return cmd_gen(args, out, gen_type, blobs, kr, gen_agg, gen_sampler, gen_output, gen_model, gen_report,
                           gen_timing);
        }

        if (*fit_cmd) {
            Report report(args, "fit");
            if (!fit_report.empty()) report.path = fit_report;
            report.timing = fit_timing;
            const Dataset data = load_dataset(fit_input, fit_labels, fit_header, fit_std);
            auto fitted = fit_model(data, fk);
            if (!fit_output.empty()) write_model(fit_output, fitted.model);
            if (!fit_assign.empty()) write_assignment(fit_assign, fitted.assignment, fitted.model.cardinalities(), fit_tuples);
            report.doc["config"] = knobs_json(fk);
            report.doc["config"]["input"] = fit_input;
            report.doc["config"]["standardize"] = fit_std;
            report.doc["config"]["method"] = fitted.method;
            report.doc["seed"] = fk.seed;
            report.doc["inertia"] = fitted.inertia;
            report.doc["iterations"] = fitted.iterations;
            report.doc["converged"] = fitted.converged;
            report.doc["restart_index"] = fitted.restart_index;
            report.doc["params"] = params_json(fitted.params);
            if (data.labels()) report.doc["metrics"] = label_metrics(as_labels(fitted.assignment.cells), *data.labels());
            json outputs = json::object();
            if (!fit_output.empty()) outputs["model"] = fit_output;
            if (!fit_assign.empty()) outputs["assignments"] = fit_assign;
            report.doc["outputs"] = outputs;
            out << "method=" << fitted.method << " inertia=" << format_double(fitted.inertia)
                << " iterations=" << fitted.iterations << " converged=" << (fitted.converged ? "true" : "false")
                << " restart=" << fitted.restart_index << '\n';
            if (report.doc.contains("metrics"))
                for (const auto& [name, value] : report.doc["metrics"].items())
                    out << name << '=' << format_double(value.get<double>()) << '\n';
            report.write();
            return 0;
        }

        if (*eval) {
            Report report(args, "eval");
            if (!ev_report.empty()) report.path = ev_report;
            report.timing = ev_timing;
            bool did_something = false;
            if (!ev_pred.empty() || !ev_truth.empty()) {
                if (ev_pred.empty() || ev_truth.empty()) throw ConfigError("--pred and --truth go together");
                const auto pred = read_labels(ev_pred);
                const auto truth = read_labels(ev_truth);
                if (pred.size() != truth.size()) throw DimensionError("--pred and --truth have different lengths");
                if (pred.empty()) throw DimensionError("label files are empty");
                const json m = label_metrics(pred, truth);
                report.doc["metrics"] = m;
                for (const auto& [name, value] : m.items()) out << name << '=' << format_double(value.get<double>()) << '\n';
                did_something = true;
            }
            if (!ev_input.empty() || !ev_model.empty() || !ev_assign.empty()) {
                if (ev_input.empty() || ev_model.empty())
                    throw ConfigError("inertia needs --input and --model (and optionally --assignments)");
                const Dataset data = load_dataset(ev_input, ev_labels, ev_header, false);
                const ProtoSets model = read_model(ev_model);
                const Matrix centroids = materialize_centroids(model);
                Assignment asg = ev_assign.empty() ? assign(data, model).assignment
                                                   : Assignment(read_assignment(ev_assign), centroids.rows());
                const double value = inertia(data, centroids, asg);
                report.doc["inertia"] = value;
                out << "inertia=" << format_double(value) << '\n';
                did_something = true;
            }
            if (!did_something) throw ConfigError("eval needs --pred/--truth or --input/--model");
            report.write();
            return 0;
        }

        if (*design) {
            bool did_something = false;
            if (balanced) {
                const auto pair = balanced_factor_pair(*balanced);
                out << pair.larger << ' ' << pair.smaller << '\n';
                if (pair.no_compression) err << "warning: " << *balanced << " has no non-trivial factorization\n";
                did_something = true;
            }
            if (optimal) {
                const auto choice = optimal_num_sets(*optimal);
                out << choice.num_sets << ' ' << choice.set_size << ' ' << format_double(choice.representable) << '\n';
                did_something = true;
            }
            if (bounds_k) {
                const auto b = set_count_bounds(*bounds_k, h_min);
                out << format_double(b.lower) << ' ' << b.upper << '\n';
                did_something = true;
            }
            if (!param_h.empty()) {
                const auto p = param_report(param_h, param_m, ModelKind::KhatriRao);
                out << "vectors=" << p.vector_count << " scalars=" << p.scalar_count
                    << " centroids=" << p.represented_centroids << " ratio=" << format_double(p.ratio_vs_full) << '\n';
                did_something = true;
            }
            if (!hadamard.empty()) {
                if (hadamard.size() < 3) throw ConfigError("--hadamard needs d,m,r1[,r2,...]");
                const std::size_t d = hadamard[0], m = hadamard[1];
                std::size_t params = 0, bound = 1;
                for (std::size_t i = 2; i < hadamard.size(); ++i) {
                    if (hadamard[i] == 0) throw ConfigError("ranks must be >= 1");
                    params += hadamard[i] * (d + m);
                    bound *= hadamard[i];
                }
                out << "parameters=" << params << " full=" << d * m << " rank_bound=" << bound << '\n';
                did_something = true;
            }
            if (!did_something) throw ConfigError("design needs one of --balanced-pair, --optimal-sets, --set-bounds, --params, --hadamard");
            return 0;
        }

        if (*quant) {
            Report report(args, "quantize");
            if (!q_report.empty()) report.path = q_report;
            report.timing = q_timing;
            const Image image = read_ppm(q_input);
            const Dataset& pixels = image.pixels;
            Dataset train = pixels;
            if (q_sample > 0 && q_sample < pixels.size()) {
                Rng rng(derive_seed(qk.seed, 0x51A7));
                const auto picks = sample_without_replacement(rng, pixels.size(), q_sample);
                Matrix subset(q_sample, 3);
                for (std::size_t i = 0; i < q_sample; ++i) subset.set_row(i, pixels.point(picks[i]));
                train = Dataset(std::move(subset));
            }

            ProtoSets codebook({Matrix(1, 3)}, Aggregator::Sum);
            ParamReport params;
            std::string method;
            if (q_random > 0) {
                if (!qk.h.empty() || qk.kmeans > 0) throw ConfigError("--random-codebook cannot be combined with --h or --kmeans");
                std::optional<double> best;
                for (std::size_t r = 0; r < qk.restarts; ++r) {
                    Rng rng(derive_seed(qk.seed, r));
                    const auto picks = sample_without_replacement(rng, train.size(), q_random);
                    Matrix cb(q_random, 3);
                    for (std::size_t i = 0; i < q_random; ++i) cb.set_row(i, train.point(picks[i]));
                    ProtoSets candidate({std::move(cb)}, Aggregator::Sum);
                    const double value = assign(train, candidate).inertia();
                    if (!best || value < *best) {
                        best = value;
                        codebook = std::move(candidate);
                    }
                }
                const std::vector<std::size_t> card{q_random};
                params = param_report(card, 3, ModelKind::Lloyd);
                method = "random";
            } else {
                auto fitted = fit_model(train, qk);
                codebook = std::move(fitted.model);
                params = fitted.params;
                method = fitted.method;
            }

            const auto mapped = assign(pixels, codebook);
            const Matrix centroids = materialize_centroids(codebook);
            Matrix quantized(pixels.size(), 3);
            for (std::size_t i = 0; i < pixels.size(); ++i) quantized.set_row(i, centroids.row(mapped.assignment.cells[i]));
            write_ppm(q_output, Dataset(std::move(quantized)), image.width, image.height);

            const double total = mapped.inertia();
            report.doc["config"] = knobs_json(qk);
            report.doc["config"]["input"] = q_input;
            report.doc["config"]["sample"] = q_sample;
            report.doc["config"]["random_codebook"] = q_random;
            report.doc["config"]["method"] = method;
            report.doc["seed"] = qk.seed;
            report.doc["inertia"] = total;
            report.doc["inertia_255"] = total * 255.0 * 255.0;
            report.doc["params"] = params_json(params);
            report.doc["outputs"] = json{{"image", q_output}};
            out << "method=" << method << " inertia=" << format_double(total) << " codebook_scalars=" << params.scalar_count
                << '\n';
            report.write();
            return 0;
        }

        if (*fed) {
            Report report(args, "fed");
            if (!f_report.empty()) report.path = f_report;
            report.timing = f_timing;
            const Dataset data = load_dataset(f_input, f_labels, f_header, f_std);
            FederatedConfig cfg;
            cfg.n_clients = f_clients;
            cfg.rounds = f_rounds;
            cfg.seed = f_seed;
            cfg.bytes_per_scalar = f_bps;
            cfg.init = parse_init(f_init);
            if (f_kmeans > 0) {
                if (!f_h.empty()) throw ConfigError("--kmeans cannot be combined with --h");
                cfg.model = FederatedModel::lloyd(f_kmeans);
            } else {
                if (f_h.empty()) throw ConfigError("either --h or --kmeans is required");
                cfg.model = FederatedModel::khatri_rao(f_h, parse_aggregator(f_agg));
            }
            const auto result = run_federated(data, cfg);
            if (!f_output.empty()) write_ledger_csv(f_output, result.ledger);
            json rounds = json::array();
            for (const auto& r : result.ledger.records)
                rounds.push_back(json{{"round", r.round},
                                      {"s2c_bytes", r.server_to_clients_bytes},
                                      {"c2s_bytes", r.clients_to_server_bytes},
                                      {"inertia", r.inertia_after_round}});
            report.doc["config"] = json{{"clients", f_clients}, {"rounds", f_rounds}, {"h", f_h},
                                        {"kmeans", f_kmeans},   {"agg", f_agg},       {"bytes_per_scalar", f_bps},
                                        {"init", f_init},       {"input", f_input}};
            report.doc["seed"] = f_seed;
            report.doc["inertia"] = result.fit.inertia;
            report.doc["ledger"] = rounds;
            report.doc["params"] = params_json(param_report(cfg.model.set_sizes(), data.dim(), cfg.model.kind));
            if (!f_output.empty()) report.doc["outputs"] = json{{"ledger", f_output}};
            for (const auto& r : result.ledger.records)
                out << r.round << ',' << r.server_to_clients_bytes << ',' << r.clients_to_server_bytes << ','
                    << format_double(r.inertia_after_round) << '\n';
            report.write();
            return 0;
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}

int dispatch(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace krclust::cli
