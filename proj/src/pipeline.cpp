#include "dram_oracle/pipeline.hpp"

#include <algorithm>
#include <filesystem>

#include "dram_oracle/rng.hpp"

namespace dram_oracle {

namespace {

constexpr uint64_t kDeviceStream = 0x64657669;
constexpr uint64_t kWerStream = 0x77657273;
constexpr uint64_t kPueStream = 0x70756573;

uint64_t string_hash(const std::string& s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ULL;
    return h;
}

EnvPoint probe_env(double t_refp, double temp, double v_dd) {
    EnvPoint e;
    e.t_refp_s = t_refp;
    e.temp_c = temp;
    e.v_dd = v_dd;
    return e;
}

}  // namespace

ProfiledWorkload profile_workload(const WorkloadSpec& spec, const SimConfig& cfg, Exec exec) {
    ProfiledWorkload pw;
    pw.spec = spec;
    pw.trace = generate_trace(spec, cfg.device_words(), exec);
    pw.stats = trace_stats(pw.trace, cfg.words_per_row);
    // Program features are environment-independent; stamp a valid probe point
    // and overwrite the environment fields per sample later.
    pw.base_features = extract_features(pw.trace, pw.stats, "", probe_env(kTrefpMinS, 50.0, 1.5), cfg);
    // The simulator consumes per-word statistics plus the spec; the raw
    // access stream is no longer needed and can be large.
    pw.trace.accesses.clear();
    pw.trace.accesses.shrink_to_fit();
    return pw;
}

std::vector<ProfiledWorkload> profile_workload_dir(const std::string& dir, const SimConfig& cfg,
                                                   Exec exec) {
    namespace fs = std::filesystem;
    std::vector<std::string> files;
    if (!fs::is_directory(dir))
        throw IoError(IoError::Kind::open_failed, dir + " is not a directory");
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".wl")
            files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw ValidationError("no .wl workload specs under " + dir);

    std::vector<ProfiledWorkload> out;
    out.reserve(files.size());
    for (const auto& f : files)
        out.push_back(profile_workload(WorkloadSpec::from_kv(load_kv_file(f)), cfg, exec));
    return out;
}

std::vector<DimmProfile> build_device_set(const SimConfig& cfg, uint64_t base_seed, Exec exec) {
    cfg.validate();
    std::vector<DimmProfile> devices;
    for (size_t d = 0; d < cfg.device_ids.size(); ++d) {
        const uint64_t seed = mix(base_seed, kDeviceStream, string_hash(cfg.device_ids[d]));
        devices.push_back(build_dimm(cfg, cfg.device_ids[d], seed, cfg.device_shifts[d], exec));
    }
    return devices;
}

namespace {

struct GridCell {
    size_t workload, device;
    double t_refp, temp;
};

std::vector<GridCell> make_grid(size_t n_workloads, size_t n_devices,
                                const std::vector<double>& trefp_grid,
                                const std::vector<double>& temp_grid) {
    std::vector<GridCell> grid;
    for (size_t w = 0; w < n_workloads; ++w)
        for (size_t d = 0; d < n_devices; ++d)
            for (double refp : trefp_grid)
                for (double temp : temp_grid) grid.push_back({w, d, refp, temp});
    return grid;
}

Dataset build_dataset_impl(const std::vector<ProfiledWorkload>& workloads,
                           const std::vector<DimmProfile>& devices, const SimConfig& cfg,
                           const std::vector<double>& trefp_grid,
                           const std::vector<double>& temp_grid, double v_dd, uint32_t n_exp,
                           TargetKind target, uint64_t seed, Exec exec) {
    if (workloads.empty()) throw ValidationError("build-dataset: no workloads");
    if (devices.empty()) throw ValidationError("build-dataset: no devices");
    if (trefp_grid.empty() || temp_grid.empty())
        throw ValidationError("build-dataset: empty environment grid");

    const std::vector<GridCell> grid =
        make_grid(workloads.size(), devices.size(), trefp_grid, temp_grid);
    std::vector<double> labels(grid.size());

    const uint64_t stream = target == TargetKind::wer ? kWerStream : kPueStream;
    auto run_cell = [&](size_t g) {
        const GridCell& cell = grid[g];
        const ProfiledWorkload& pw = workloads[cell.workload];
        const DimmProfile& dimm = devices[cell.device];
        const EnvPoint env = probe_env(cell.t_refp, cell.temp, v_dd);
        const uint64_t run_seed =
            mix(seed, stream, g);  // grid order is deterministic, so g indexes the cell
        if (target == TargetKind::wer) {
            labels[g] = measure_wer(simulate_run(pw.trace, pw.stats, dimm, env, run_seed, cfg,
                                                 Exec::serial));
        } else {
            labels[g] =
                estimate_pue(pw.trace, pw.stats, dimm, env, n_exp, run_seed, cfg, Exec::serial);
        }
    };

    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int64_t g = 0; g < static_cast<int64_t>(grid.size()); ++g)
            run_cell(static_cast<size_t>(g));
    } else {
        for (size_t g = 0; g < grid.size(); ++g) run_cell(g);
    }

    Dataset ds;
    ds.target_kind = target;
    for (size_t g = 0; g < grid.size(); ++g) {
        const GridCell& cell = grid[g];
        FeatureVector fv = workloads[cell.workload].base_features;
        fv.workload = workloads[cell.workload].spec.name;
        fv.device = devices[cell.device].device_id;
        fv.t_refp_s = cell.t_refp;
        fv.temp_c = cell.temp;
        fv.v_dd = v_dd;
        ds.add_row(fv, labels[g]);
    }
    ds.validate();
    return ds;
}

}  // namespace

Dataset build_wer_dataset(const std::vector<ProfiledWorkload>& workloads,
                          const std::vector<DimmProfile>& devices, const SimConfig& cfg,
                          const std::vector<double>& trefp_grid,
                          const std::vector<double>& temp_grid, double v_dd, uint64_t seed,
                          Exec exec) {
    return build_dataset_impl(workloads, devices, cfg, trefp_grid, temp_grid, v_dd, 1,
                              TargetKind::wer, seed, exec);
}

Dataset build_pue_dataset(const std::vector<ProfiledWorkload>& workloads,
                          const std::vector<DimmProfile>& devices, const SimConfig& cfg,
                          const std::vector<double>& trefp_grid,
                          const std::vector<double>& temp_grid, double v_dd, uint32_t n_exp,
                          uint64_t seed, Exec exec) {
    if (n_exp == 0) throw ValidationError("build-dataset: n_exp must be >= 1");
    return build_dataset_impl(workloads, devices, cfg, trefp_grid, temp_grid, v_dd, n_exp,
                              TargetKind::p_ue, seed, exec);
}

}  // namespace dram_oracle
