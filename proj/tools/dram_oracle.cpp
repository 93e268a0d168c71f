#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dram_oracle/eval.hpp"
#include "dram_oracle/pipeline.hpp"
#include "dram_oracle/rng.hpp"

namespace dro = dram_oracle;

namespace {

struct GlobalOpts {
    std::string config_path;
    uint64_t seed = 42;
};

dro::SimConfig load_config(const GlobalOpts& g) {
    if (!g.config_path.empty()) return dro::SimConfig::load(g.config_path);
    if (const char* env = std::getenv("DRAM_ORACLE_CONFIG"); env && *env)
        return dro::SimConfig::load(env);
    dro::SimConfig cfg;
    cfg.validate();
    return cfg;
}

dro::EnvPoint make_env(double trefp, double temp, double vdd) {
    dro::EnvPoint e;
    e.t_refp_s = trefp;
    e.temp_c = temp;
    e.v_dd = vdd;
    e.validate();
    return e;
}

int cmd_gen_trace(const GlobalOpts& g, const std::string& spec_path, const std::string& out,
                  bool seed_given) {
    const dro::SimConfig cfg = load_config(g);
    dro::WorkloadSpec spec = dro::WorkloadSpec::from_kv(dro::load_kv_file(spec_path));
    if (seed_given) spec.seed = g.seed;
    const dro::MemoryTrace trace = dro::generate_trace(spec, cfg.device_words());
    const uint64_t bytes = dro::write_trace_file(trace, out);
    std::cout << "wrote " << out << ": " << trace.accesses.size() << " accesses, " << bytes
              << " bytes\n";
    return 0;
}

int cmd_build_dataset(const GlobalOpts& g, const std::string& trace_dir,
                      const std::string& workload_dir, const std::string& target,
                      std::vector<double> trefp, std::vector<double> temp, double vdd,
                      uint32_t n_exp, const std::string& out) {
    const dro::SimConfig cfg = load_config(g);

    std::vector<dro::ProfiledWorkload> workloads;
    if (!workload_dir.empty()) {
        workloads = dro::profile_workload_dir(workload_dir, cfg, dro::Exec::parallel);
    } else {
        namespace fs = std::filesystem;
        if (!fs::is_directory(trace_dir))
            throw dro::IoError(dro::IoError::Kind::open_failed, trace_dir + " is not a directory");
        std::vector<std::string> files;
        for (const auto& e : fs::directory_iterator(trace_dir))
            if (e.is_regular_file() && e.path().extension() == ".trace")
                files.push_back(e.path().string());
        std::sort(files.begin(), files.end());
        if (files.empty()) throw dro::ValidationError("no .trace files under " + trace_dir);
        for (const auto& f : files) {
            dro::ProfiledWorkload pw;
            pw.trace = dro::read_trace_file(f);
            pw.spec = pw.trace.spec;
            pw.stats = dro::trace_stats(pw.trace, cfg.words_per_row);
            pw.base_features = dro::extract_features(pw.trace, pw.stats, "",
                                                     make_env(dro::kTrefpMinS, 50.0, 1.5), cfg);
            workloads.push_back(std::move(pw));
        }
    }

    if (trefp.empty()) trefp = cfg.trefp_grid;
    if (temp.empty()) temp = cfg.temp_grid;
    if (vdd == 0.0) vdd = cfg.v_dd;
    for (double t : trefp) make_env(t, temp.front(), vdd);  // validates ranges early
    for (double t : temp) make_env(trefp.front(), t, vdd);

    const std::vector<dro::DimmProfile> devices =
        dro::build_device_set(cfg, g.seed, dro::Exec::parallel);

    const dro::TargetKind kind = dro::target_kind_from_string(target);
    const dro::Dataset ds =
        kind == dro::TargetKind::wer
            ? dro::build_wer_dataset(workloads, devices, cfg, trefp, temp, vdd, g.seed,
                                     dro::Exec::parallel)
            : dro::build_pue_dataset(workloads, devices, cfg, trefp, temp, vdd,
                                     n_exp ? n_exp : cfg.n_exp, g.seed, dro::Exec::parallel);
    dro::write_dataset_csv(ds, out);
    std::cout << "wrote " << out << ": " << ds.size() << " rows (" << workloads.size()
              << " workloads x " << devices.size() << " devices x " << trefp.size() << " t_refp x "
              << temp.size() << " temps)\n";
    return 0;
}

int cmd_correlate(const std::string& dataset_path, const std::string& out) {
    const dro::Dataset ds = dro::read_dataset_csv(dataset_path);
    const auto ranked = dro::rank_features(ds);
    std::ofstream os(out);
    if (!os) throw dro::IoError(dro::IoError::Kind::open_failed, "cannot open " + out);
    os << "feature,spearman_r\n";
    os.precision(10);
    for (const auto& [name, rs] : ranked) os << name << "," << rs << "\n";
    std::cout << "top features vs " << to_string(ds.target_kind) << ":\n";
    std::cout.precision(4);
    for (size_t i = 0; i < ranked.size() && i < 8; ++i)
        std::cout << "  " << ranked[i].first << "  r_s=" << ranked[i].second << "\n";
    std::cout << "wrote " << out << "\n";
    return 0;
}

dro::ModelConfig make_model_config(const std::string& model, int feature_set, uint32_t k,
                                   uint32_t trees, uint64_t seed) {
    dro::ModelConfig mc;
    mc.kind = dro::model_kind_from_string(model);
    if (feature_set < 1 || feature_set > 3)
        throw dro::ValidationError("--feature-set must be 1, 2 or 3");
    mc.feature_set = static_cast<dro::FeatureSetId>(feature_set);
    mc.k = k;
    if (trees) mc.n_trees = trees;
    mc.seed = seed;
    return mc;
}

int cmd_train(const GlobalOpts& g, const std::string& dataset_path, const std::string& model,
              int feature_set, uint32_t k, uint32_t trees, const std::string& out) {
    const dro::Dataset ds = dro::read_dataset_csv(dataset_path);
    dro::ModelConfig mc = make_model_config(model, feature_set, k ? k : 5, trees, g.seed);
    const dro::TrainedModel m = dro::train_model(ds, mc, dro::Exec::parallel);
    dro::write_model_file(m, out);
    std::cout << "trained " << model << " on " << ds.size() << " rows, wrote " << out << "\n";
    return 0;
}

int cmd_crossval(const GlobalOpts& g, const std::string& dataset_path,
                 std::vector<std::string> models, std::vector<int> sets, uint32_t k,
                 uint32_t trees, const std::string& out) {
    const dro::Dataset ds = dro::read_dataset_csv(dataset_path);
    if (models.empty()) models = {"knn", "rdf", "svr", "baseline"};
    if (sets.empty()) sets = {1, 2, 3};

    std::vector<dro::ModelConfig> configs;
    for (const std::string& m : models) {
        if (m == "baseline") {
            configs.push_back(make_model_config(m, 1, 0, 0, g.seed));
            continue;  // feature sets do not apply to the per-cell baseline
        }
        for (int s : sets) configs.push_back(make_model_config(m, s, k, trees, g.seed));
    }

    const auto reports = dro::compare_models(ds, configs, dro::Exec::parallel);
    {
        std::ofstream os(out);
        if (!os) throw dro::IoError(dro::IoError::Kind::open_failed, "cannot open " + out);
        os << dro::report_csv(reports);
    }
    const std::string summary_path = out + ".txt";
    {
        std::ofstream os(summary_path);
        os << dro::report_summary(reports);
    }
    // Bar charts for the best-MPE report, by workload and by device.
    size_t best = 0;
    for (size_t i = 1; i < reports.size(); ++i)
        if (reports[i].overall_mpe < reports[best].overall_mpe) best = i;
    dro::write_bar_chart_svg(out + ".workloads.svg",
                             "MPE % per workload (" + to_string(reports[best].kind) + ")",
                             reports[best].per_workload_mpe);
    dro::write_bar_chart_svg(out + ".devices.svg",
                             "MPE % per device (" + to_string(reports[best].kind) + ")",
                             reports[best].per_device_mpe);
    std::cout << dro::report_summary(reports);
    std::cout << "wrote " << out << ", " << summary_path << " and SVG charts\n";
    return 0;
}

int cmd_predict(const GlobalOpts& g, const std::string& model_path, const std::string& features,
                const std::string& trace_path, double trefp, double temp, double vdd,
                const std::string& device) {
    const dro::TrainedModel model = dro::read_model_file(model_path);
    std::cout.precision(10);

    if (!features.empty()) {
        const dro::Dataset ds = dro::read_dataset_csv(features);
        const dro::BoundModel bound = dro::bind_model(model, ds.feature_names);
        for (size_t i = 0; i < ds.size(); ++i)
            std::cout << ds.workloads[i] << "," << ds.devices[i] << ","
                      << bound.predict(ds.rows[i], ds.devices[i]) << "\n";
        return 0;
    }

    const dro::SimConfig cfg = load_config(g);
    const dro::MemoryTrace trace = dro::read_trace_file(trace_path);
    const dro::TraceStats stats = dro::trace_stats(trace, cfg.words_per_row);
    const dro::EnvPoint env = make_env(trefp, temp, vdd == 0.0 ? cfg.v_dd : vdd);
    const dro::FeatureVector fv = dro::extract_features(trace, stats, device, env, cfg);
    const double value =
        dro::predict(model, dro::feature_schema(), dro::feature_values(fv), device);
    std::cout << to_string(model.target_kind) << "=" << value << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"workload-aware DRAM error prediction toolkit"};
    app.require_subcommand(1);

    GlobalOpts g;
    bool seed_given = false;
    app.add_option("--config", g.config_path,
                   "simulator config file (default: $DRAM_ORACLE_CONFIG or built-ins)");
    app.add_option("--seed", g.seed, "base seed for all derived randomness")
        ->each([&seed_given](const std::string&) { seed_given = true; });

    // gen-trace
    auto* gen = app.add_subcommand("gen-trace", "generate a synthetic workload trace");
    std::string gen_spec, gen_out = "workload.trace";
    gen->add_option("--spec", gen_spec, "workload spec file (key=value)")->required();
    gen->add_option("--out", gen_out, "output trace file");

    // build-dataset
    auto* bd = app.add_subcommand("build-dataset",
                                  "profile workloads and label them over the environment grid");
    std::string bd_traces, bd_workloads, bd_target = "wer", bd_out = "dataset.csv";
    std::vector<double> bd_trefp, bd_temp;
    double bd_vdd = 0.0;
    uint32_t bd_nexp = 0;
    bd->add_option("--trace-dir", bd_traces, "directory of .trace files");
    bd->add_option("--workload-dir", bd_workloads, "directory of .wl specs (generates traces)");
    bd->add_option("--target", bd_target, "wer or pue");
    bd->add_option("--trefp", bd_trefp, "refresh periods in seconds (repeatable)");
    bd->add_option("--temp", bd_temp, "temperatures in degC (repeatable)");
    bd->add_option("--vdd", bd_vdd, "supply voltage in V");
    bd->add_option("--n-exp", bd_nexp, "repeated experiments per P_UE sample");
    bd->add_option("--out", bd_out, "output CSV");

    // correlate
    auto* corr = app.add_subcommand("correlate", "rank program features by |spearman r| vs target");
    std::string corr_dataset, corr_out = "correlation.csv";
    corr->add_option("--dataset", corr_dataset, "dataset CSV")->required();
    corr->add_option("--out", corr_out, "output CSV");

    // train
    auto* tr = app.add_subcommand("train", "fit a model on a dataset CSV");
    std::string tr_dataset, tr_model = "knn", tr_out = "model.doml";
    int tr_set = 1;
    uint32_t tr_k = 0, tr_trees = 0;
    tr->add_option("--dataset", tr_dataset, "dataset CSV")->required();
    tr->add_option("--model", tr_model, "knn, rdf, svr or baseline");
    tr->add_option("--feature-set", tr_set, "1, 2 or 3");
    tr->add_option("--k", tr_k, "knn neighbour count");
    tr->add_option("--trees", tr_trees, "rdf tree count");
    tr->add_option("--out", tr_out, "output model file");

    // crossval
    auto* cv = app.add_subcommand("crossval", "leave-one-workload-out cross validation");
    std::string cv_dataset, cv_out = "crossval.csv";
    std::vector<std::string> cv_models;
    std::vector<int> cv_sets;
    uint32_t cv_k = 0, cv_trees = 0;
    cv->add_option("--dataset", cv_dataset, "dataset CSV")->required();
    cv->add_option("--model", cv_models, "models to compare (repeatable)");
    cv->add_option("--feature-set", cv_sets, "feature sets to compare (repeatable)");
    cv->add_option("--k", cv_k, "knn k; 0 sweeps {1,3,5,7}");
    cv->add_option("--trees", cv_trees, "rdf tree count");
    cv->add_option("--out", cv_out, "report CSV (also writes .txt and .svg siblings)");

    // predict
    auto* pr = app.add_subcommand("predict", "predict WER or P_UE with a trained model");
    std::string pr_model, pr_features, pr_trace, pr_device = "dimm0";
    double pr_trefp = 0.064, pr_temp = 50.0, pr_vdd = 0.0;
    pr->add_option("--model", pr_model, "model file")->required();
    pr->add_option("--features", pr_features, "feature CSV to predict row by row");
    pr->add_option("--trace", pr_trace, "trace file (used with --trefp/--temp/--vdd/--device)");
    pr->add_option("--trefp", pr_trefp, "refresh period in seconds");
    pr->add_option("--temp", pr_temp, "temperature in degC");
    pr->add_option("--vdd", pr_vdd, "supply voltage in V");
    pr->add_option("--device", pr_device, "device id");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed()) return cmd_gen_trace(g, gen_spec, gen_out, seed_given);
        if (bd->parsed()) {
            if (bd_traces.empty() == bd_workloads.empty())
                throw dro::ValidationError(
                    "build-dataset needs exactly one of --trace-dir or --workload-dir");
            return cmd_build_dataset(g, bd_traces, bd_workloads, bd_target, bd_trefp, bd_temp,
                                     bd_vdd, bd_nexp, bd_out);
        }
        if (corr->parsed()) return cmd_correlate(corr_dataset, corr_out);
        if (tr->parsed()) return cmd_train(g, tr_dataset, tr_model, tr_set, tr_k, tr_trees, tr_out);
        if (cv->parsed())
            return cmd_crossval(g, cv_dataset, cv_models, cv_sets, cv_k, cv_trees, cv_out);
        if (pr->parsed()) {
            if (pr_features.empty() && pr_trace.empty())
                throw dro::ValidationError("predict needs --features or --trace");
            return cmd_predict(g, pr_model, pr_features, pr_trace, pr_trefp, pr_temp, pr_vdd,
                               pr_device);
        }
    } catch (const dro::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.cls);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 1;
}
