// Compares the serial reference kernels against the OpenMP-parallel paths on
// a characterization-sized problem and checks they agree.
#include <chrono>
#include <cstdio>
#include <string>

#include "dram_oracle/eval.hpp"
#include "dram_oracle/pipeline.hpp"

namespace dro = dram_oracle;

namespace {

template <typename F>
double time_ms(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

void row(const char* name, double serial_ms, double parallel_ms, bool equal) {
    std::printf("%-22s %10.1f ms %10.1f ms   x%.2f   %s\n", name, serial_ms, parallel_ms,
                parallel_ms > 0 ? serial_ms / parallel_ms : 0.0,
                equal ? "results match" : "RESULTS DIFFER");
}

}  // namespace

int main() {
    dro::SimConfig cfg;
    cfg.validate();

    dro::WorkloadSpec spec;
    spec.name = "bench";
    spec.n_instructions = 2'000'000;
    spec.footprint_words = 131072;
    spec.target_access_rate = 8e-5;
    spec.cpi = 6000;
    spec.write_fraction = 0.5;
    spec.value_alphabet_size = 65536;
    spec.reuse_profile = dro::ReuseProfile::zipfian;
    spec.zipf_s = 0.8;
    spec.threads = 8;
    spec.seed = 7;

    dro::MemoryTrace trace_s, trace_p;
    const double gen_s = time_ms([&] { trace_s = dro::generate_trace(spec, 0, dro::Exec::serial); });
    const double gen_p =
        time_ms([&] { trace_p = dro::generate_trace(spec, 0, dro::Exec::parallel); });
    row("generate_trace", gen_s, gen_p, trace_s == trace_p);

    const dro::TraceStats stats = dro::trace_stats(trace_s, cfg.words_per_row);

    dro::DimmProfile dimm_s, dimm_p;
    const double dimm_ser =
        time_ms([&] { dimm_s = dro::build_dimm(cfg, "bench", 11, -4.0, dro::Exec::serial); });
    const double dimm_par =
        time_ms([&] { dimm_p = dro::build_dimm(cfg, "bench", 11, -4.0, dro::Exec::parallel); });
    row("build_dimm", dimm_ser, dimm_par, dimm_s == dimm_p);

    dro::EnvPoint env;
    env.t_refp_s = 2.283;
    env.temp_c = 70.0;
    env.v_dd = 1.428;

    dro::RunOutcome run_s, run_p;
    double sim_ser = 0.0, sim_par = 0.0;
    for (int i = 0; i < 20; ++i) {
        sim_ser += time_ms(
            [&] { run_s = dro::simulate_run(trace_s, stats, dimm_s, env, 99, cfg, dro::Exec::serial); });
        sim_par += time_ms([&] {
            run_p = dro::simulate_run(trace_s, stats, dimm_s, env, 99, cfg, dro::Exec::parallel);
        });
    }
    const bool sim_eq = run_s.ce_words == run_p.ce_words && run_s.ue_words == run_p.ue_words &&
                        run_s.sdc_words == run_p.sdc_words;
    row("simulate_run (x20)", sim_ser, sim_par, sim_eq);

    double pue_s = 0.0, pue_p = 0.0;
    double pue_ser = time_ms(
        [&] { pue_s = dro::estimate_pue(trace_s, stats, dimm_s, env, 10, 5, cfg, dro::Exec::serial); });
    double pue_par = time_ms([&] {
        pue_p = dro::estimate_pue(trace_s, stats, dimm_s, env, 10, 5, cfg, dro::Exec::parallel);
    });
    row("estimate_pue (10 runs)", pue_ser, pue_par, pue_s == pue_p);

    // Tree-ensemble training on a synthetic regression problem.
    dro::Dataset ds;
    ds.target_kind = dro::TargetKind::p_ue;
    for (int i = 0; i < 3000; ++i) {
        dro::FeatureVector fv;
        fv.workload = "w" + std::to_string(i % 17);
        fv.device = "d0";
        fv.temp_c = 50 + (i % 3) * 10;
        fv.t_refp_s = 0.618 + (i % 4) * 0.555;
        fv.v_dd = 1.428;
        fv.t_reuse_s = 0.05 * ((i * 37) % 100 + 1);
        fv.h_dp_bits = (i * 13) % 32;
        fv.mem_accesses_per_cycle = 1e-5 * ((i * 7) % 50 + 1);
        fv.wait_cycles_ratio = 1e-3 * ((i * 7) % 50 + 1);
        fv.nuisance.assign(dro::nuisance_feature_names().size(), 0.5);
        ds.add_row(fv, std::min(1.0, fv.mem_accesses_per_cycle * 2e4));
    }
    dro::ModelConfig mc;
    mc.kind = dro::ModelKind::rdf;
    mc.n_trees = 64;
    dro::TrainedModel rdf_s, rdf_p;
    const double rdf_ser = time_ms([&] { rdf_s = dro::train_model(ds, mc, dro::Exec::serial); });
    const double rdf_par = time_ms([&] { rdf_p = dro::train_model(ds, mc, dro::Exec::parallel); });
    const bool rdf_eq = std::get<dro::RdfParams>(rdf_s.params) == std::get<dro::RdfParams>(rdf_p.params);
    row("train_rdf (64 trees)", rdf_ser, rdf_par, rdf_eq);

    return 0;
}
