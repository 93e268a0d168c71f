#include "dram_oracle/config.hpp"

#include <sstream>

#include "dram_oracle/errors.hpp"

namespace dram_oracle {

void SimConfig::validate() const {
    if (f_clk_hz <= 0) throw ValidationError("f_clk_hz must be positive");
    if (stall_cost_cycles < 0) throw ValidationError("stall_cost_cycles must be non-negative");
    if (n_rows == 0 || words_per_row == 0) throw ValidationError("device geometry must be non-empty");
    if (weak_cell_rate < 0) throw ValidationError("weak_cell_rate must be non-negative");
    if (retention_sigma_log < 0) throw ValidationError("retention_sigma_log must be non-negative");
    if (retention_floor_s <= 0) throw ValidationError("retention_floor_s must be positive");
    if (retention_ceiling_s <= retention_floor_s)
        throw ValidationError("retention_ceiling_s must exceed retention_floor_s");
    if (sigma_vrt < 0) throw ValidationError("sigma_vrt must be non-negative");
    if (interference_factor <= 0 || interference_factor > 1)
        throw ValidationError("interference_factor must be in (0, 1]");
    if (never_reused_factor < 1) throw ValidationError("never_reused_factor must be >= 1");
    if (device_ids.size() != device_shifts.size())
        throw ValidationError("device_ids and device_shifts must have equal length");
    if (n_exp == 0) throw ValidationError("n_exp must be >= 1");
}

static std::string join_f64(const std::vector<double>& xs) {
    std::ostringstream os;
    os.precision(17);
    for (size_t i = 0; i < xs.size(); ++i) {
        if (i) os << ",";
        os << xs[i];
    }
    return os.str();
}

static std::string join_str(const std::vector<std::string>& xs) {
    std::string out;
    for (size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ",";
        out += xs[i];
    }
    return out;
}

KvMap SimConfig::to_kv() const {
    KvMap kv;
    kv.set_f64("f_clk_hz", f_clk_hz);
    kv.set_f64("stall_cost_cycles", stall_cost_cycles);
    kv.set_u64("n_rows", n_rows);
    kv.set_u64("words_per_row", words_per_row);
    kv.set_f64("weak_cell_rate", weak_cell_rate);
    kv.set_f64("retention_mu_log", retention_mu_log);
    kv.set_f64("retention_sigma_log", retention_sigma_log);
    kv.set_f64("retention_floor_s", retention_floor_s);
    kv.set_f64("retention_ceiling_s", retention_ceiling_s);
    kv.set_f64("screen_below_s", screen_below_s);
    kv.set_f64("temp_alpha", temp_alpha);
    kv.set_f64("vdd_beta", vdd_beta);
    kv.set_f64("sigma_vrt", sigma_vrt);
    kv.set_f64("hammer_threshold_per_s", hammer_threshold_per_s);
    kv.set_f64("interference_factor", interference_factor);
    kv.set_u64("reset_pattern", reset_pattern);
    kv.set("reuse_gap_mode", reuse_min_gap ? "min" : "mean");
    kv.set_f64("never_reused_factor", never_reused_factor);
    kv.set("device_ids", join_str(device_ids));
    kv.set("device_shifts", join_f64(device_shifts));
    kv.set_f64("sigma_dev", sigma_dev);
    kv.set("trefp_grid", join_f64(trefp_grid));
    kv.set("temp_grid", join_f64(temp_grid));
    kv.set("pue_trefp_grid", join_f64(pue_trefp_grid));
    kv.set("pue_temp_grid", join_f64(pue_temp_grid));
    kv.set_f64("v_dd", v_dd);
    kv.set_u64("n_exp", n_exp);
    return kv;
}

SimConfig SimConfig::from_kv(const KvMap& kv) {
    SimConfig c;
    c.f_clk_hz = kv.get_f64_or("f_clk_hz", c.f_clk_hz);
    c.stall_cost_cycles = kv.get_f64_or("stall_cost_cycles", c.stall_cost_cycles);
    c.n_rows = kv.get_u64_or("n_rows", c.n_rows);
    c.words_per_row = static_cast<uint32_t>(kv.get_u64_or("words_per_row", c.words_per_row));
    c.weak_cell_rate = kv.get_f64_or("weak_cell_rate", c.weak_cell_rate);
    c.retention_mu_log = kv.get_f64_or("retention_mu_log", c.retention_mu_log);
    c.retention_sigma_log = kv.get_f64_or("retention_sigma_log", c.retention_sigma_log);
    c.retention_floor_s = kv.get_f64_or("retention_floor_s", c.retention_floor_s);
    c.retention_ceiling_s = kv.get_f64_or("retention_ceiling_s", c.retention_ceiling_s);
    c.screen_below_s = kv.get_f64_or("screen_below_s", c.screen_below_s);
    c.temp_alpha = kv.get_f64_or("temp_alpha", c.temp_alpha);
    c.vdd_beta = kv.get_f64_or("vdd_beta", c.vdd_beta);
    c.sigma_vrt = kv.get_f64_or("sigma_vrt", c.sigma_vrt);
    c.hammer_threshold_per_s = kv.get_f64_or("hammer_threshold_per_s", c.hammer_threshold_per_s);
    c.interference_factor = kv.get_f64_or("interference_factor", c.interference_factor);
    c.reset_pattern = kv.get_u64_or("reset_pattern", c.reset_pattern);
    if (kv.has("reuse_gap_mode")) {
        const std::string& m = kv.get("reuse_gap_mode");
        if (m == "min")
            c.reuse_min_gap = true;
        else if (m == "mean")
            c.reuse_min_gap = false;
        else
            throw ValidationError("reuse_gap_mode must be 'mean' or 'min'");
    }
    c.never_reused_factor = kv.get_f64_or("never_reused_factor", c.never_reused_factor);
    if (kv.has("device_ids")) c.device_ids = kv.get_str_list("device_ids");
    if (kv.has("device_shifts")) c.device_shifts = kv.get_f64_list("device_shifts");
    c.sigma_dev = kv.get_f64_or("sigma_dev", c.sigma_dev);
    if (kv.has("trefp_grid")) c.trefp_grid = kv.get_f64_list("trefp_grid");
    if (kv.has("temp_grid")) c.temp_grid = kv.get_f64_list("temp_grid");
    if (kv.has("pue_trefp_grid")) c.pue_trefp_grid = kv.get_f64_list("pue_trefp_grid");
    if (kv.has("pue_temp_grid")) c.pue_temp_grid = kv.get_f64_list("pue_temp_grid");
    c.v_dd = kv.get_f64_or("v_dd", c.v_dd);
    c.n_exp = static_cast<uint32_t>(kv.get_u64_or("n_exp", c.n_exp));
    c.validate();
    return c;
}

SimConfig SimConfig::load(const std::string& path) { return from_kv(load_kv_file(path)); }

void SimConfig::save(const std::string& path) const { save_kv_file(to_kv(), path); }

}  // namespace dram_oracle
