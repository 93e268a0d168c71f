#include "dram_oracle/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "dram_oracle/binio.hpp"
#include "models_internal.hpp"

namespace dram_oracle {

std::string to_string(ModelKind k) {
    switch (k) {
        case ModelKind::knn: return "knn";
        case ModelKind::rdf: return "rdf";
        case ModelKind::svr: return "svr";
        case ModelKind::baseline: return "baseline";
    }
    return "knn";
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "knn") return ModelKind::knn;
    if (s == "rdf") return ModelKind::rdf;
    if (s == "svr") return ModelKind::svr;
    if (s == "baseline") return ModelKind::baseline;
    throw ValidationError("unknown model kind: " + s);
}

std::vector<std::string> select_features(FeatureSetId id, const std::vector<std::string>& schema) {
    auto require = [&](const std::string& name) {
        if (std::find(schema.begin(), schema.end(), name) == schema.end())
            throw ValidationError("feature set requires missing column " + name);
        return name;
    };

    switch (id) {
        case FeatureSetId::set1:
            return {require("temp_c"),    require("t_refp_s"),
                    require("wait_cycles_ratio"), require("mem_accesses_per_cycle"),
                    require("h_dp_bits"), require("t_reuse_s")};
        case FeatureSetId::set2:
            return {require("temp_c"), require("t_refp_s"), require("wait_cycles_ratio"),
                    require("mem_accesses_per_cycle")};
        case FeatureSetId::set3: {
            // Environment plus every program feature (v_dd is an operating
            // parameter, not a program feature, and is held at its minimum
            // in the data-collection protocol).
            std::vector<std::string> cols = {require("temp_c"), require("t_refp_s")};
            for (const auto& n : schema)
                if (n != "temp_c" && n != "t_refp_s" && n != "v_dd") cols.push_back(n);
            return cols;
        }
    }
    throw ValidationError("invalid feature set id");
}

Scaler fit_scaler(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw ValidationError("standardize: empty dataset");
    if (rows.size() < 2) throw ValidationError("standardize: need at least 2 samples");
    const size_t d = rows[0].size();
    const double n = static_cast<double>(rows.size());

    Scaler s;
    s.mean.assign(d, 0.0);
    s.sd.assign(d, 0.0);
    s.constant.assign(d, 0);
    for (const auto& r : rows)
        for (size_t j = 0; j < d; ++j) s.mean[j] += r[j];
    for (size_t j = 0; j < d; ++j) s.mean[j] /= n;
    for (const auto& r : rows)
        for (size_t j = 0; j < d; ++j) {
            const double dv = r[j] - s.mean[j];
            s.sd[j] += dv * dv;
        }
    for (size_t j = 0; j < d; ++j) {
        s.sd[j] = std::sqrt(s.sd[j] / n);  // population sd
        if (s.sd[j] == 0.0) {
            s.constant[j] = 1;
            s.sd[j] = 1.0;  // flagged columns pass through unscaled
        }
    }
    return s;
}

void Scaler::apply(std::span<double> row) const {
    for (size_t j = 0; j < row.size(); ++j)
        if (!constant[j]) row[j] = (row[j] - mean[j]) / sd[j];
}

void Scaler::unapply(std::span<double> row) const {
    for (size_t j = 0; j < row.size(); ++j)
        if (!constant[j]) row[j] = row[j] * sd[j] + mean[j];
}

namespace {

double transform_target(double t, TargetTransform tr) {
    return tr == TargetTransform::log10_eps ? std::log10(t + 1e-12) : t;
}

double untransform_target(double v, TargetTransform tr) {
    if (tr == TargetTransform::log10_eps) return std::pow(10.0, v) - 1e-12;
    return v;
}

struct TrainMatrix {
    std::vector<std::string> columns;  // selected names + device_ordinal
    std::vector<size_t> src_idx;       // per column: dataset column (SIZE_MAX = device)
    std::vector<std::vector<double>> X;
    std::vector<double> y;
    std::vector<std::string> device_order;
};

TrainMatrix assemble(const Dataset& ds, FeatureSetId set, TargetTransform tr) {
    TrainMatrix tm;
    tm.columns = select_features(set, ds.feature_names);
    for (const auto& c : tm.columns) tm.src_idx.push_back(ds.column(c));
    tm.columns.push_back("device_ordinal");
    tm.src_idx.push_back(SIZE_MAX);
    tm.device_order = ds.distinct_devices();

    tm.X.resize(ds.size());
    tm.y.resize(ds.size());
    for (size_t i = 0; i < ds.size(); ++i) {
        std::vector<double> row(tm.columns.size());
        for (size_t j = 0; j + 1 < tm.columns.size(); ++j) row[j] = ds.rows[i][tm.src_idx[j]];
        const auto it =
            std::lower_bound(tm.device_order.begin(), tm.device_order.end(), ds.devices[i]);
        row.back() = static_cast<double>(it - tm.device_order.begin());
        tm.X[i] = std::move(row);
        tm.y[i] = transform_target(ds.targets[i], tr);
    }
    return tm;
}

KnnParams train_knn(std::vector<std::vector<double>> X, std::vector<double> y, uint32_t k) {
    if (k < 1 || k > X.size())
        throw ValidationError("knn: k must be in [1, n_samples]");
    KnnParams p;
    p.k = k;
    p.points = std::move(X);
    p.targets = std::move(y);
    return p;
}

double knn_predict(const KnnParams& p, std::span<const double> x) {
    const size_t n = p.points.size();
    std::vector<std::pair<double, size_t>> dist(n);
    for (size_t i = 0; i < n; ++i) {
        double d2 = 0.0;
        const auto& pt = p.points[i];
        for (size_t j = 0; j < pt.size(); ++j) {
            const double d = pt[j] - x[j];
            d2 += d * d;
        }
        dist[i] = {d2, i};  // index breaks distance ties deterministically
    }
    std::partial_sort(dist.begin(), dist.begin() + p.k, dist.end());

    // Exact matches dominate inverse-distance weighting.
    double exact_sum = 0.0;
    size_t exact_n = 0;
    for (uint32_t i = 0; i < p.k; ++i)
        if (dist[i].first == 0.0) {
            exact_sum += p.targets[dist[i].second];
            ++exact_n;
        }
    if (exact_n > 0) return exact_sum / static_cast<double>(exact_n);

    double wsum = 0.0, tsum = 0.0;
    for (uint32_t i = 0; i < p.k; ++i) {
        const double w = 1.0 / std::sqrt(dist[i].first);
        wsum += w;
        tsum += w * p.targets[dist[i].second];
    }
    return tsum / wsum;
}

BaselineParams train_baseline(const Dataset& ds, TargetTransform tr) {
    if (ds.size() == 0) throw ValidationError("baseline: empty dataset");
    const size_t refp_col = ds.column("t_refp_s");
    const size_t temp_col = ds.column("temp_c");

    std::map<std::tuple<std::string, double, double>, std::pair<double, uint64_t>> cells;
    std::map<std::pair<double, double>, std::pair<double, uint64_t>> env_cells;
    for (size_t i = 0; i < ds.size(); ++i) {
        const double refp = ds.rows[i][refp_col];
        const double temp = ds.rows[i][temp_col];
        const double t = transform_target(ds.targets[i], tr);
        auto& c = cells[{ds.devices[i], refp, temp}];
        c.first += t;
        c.second += 1;
        auto& e = env_cells[{refp, temp}];
        e.first += t;
        e.second += 1;
    }

    BaselineParams p;
    for (const auto& [key, agg] : cells)
        p.cells.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key),
                           agg.first / static_cast<double>(agg.second), agg.second});
    for (const auto& [key, agg] : env_cells)
        p.env_cells.push_back(
            {"", key.first, key.second, agg.first / static_cast<double>(agg.second), agg.second});
    return p;
}

double baseline_cell_distance(const BaselineParams::Cell& c, double refp, double temp) {
    const double dr = (c.t_refp_s - refp) / (kTrefpMaxS - kTrefpMinS);
    const double dt = (c.temp_c - temp) / (kTempMaxC - kTempMinC);
    return dr * dr + dt * dt;
}

double baseline_predict(const BaselineParams& p, const std::string& device, double refp,
                        double temp) {
    // Exact-device table first, device-pooled environment table as fallback.
    const BaselineParams::Cell* best = nullptr;
    double best_d = 0.0;
    for (const auto& c : p.cells) {
        if (c.device != device) continue;
        const double d = baseline_cell_distance(c, refp, temp);
        if (!best || d < best_d ||
            (d == best_d && std::tie(c.t_refp_s, c.temp_c) < std::tie(best->t_refp_s, best->temp_c))) {
            best = &c;
            best_d = d;
        }
    }
    if (!best) {
        for (const auto& c : p.env_cells) {
            const double d = baseline_cell_distance(c, refp, temp);
            if (!best || d < best_d ||
                (d == best_d &&
                 std::tie(c.t_refp_s, c.temp_c) < std::tie(best->t_refp_s, best->temp_c))) {
                best = &c;
                best_d = d;
            }
        }
    }
    if (!best) throw ValidationError("baseline: no cell matches query and fallback is empty");
    return best->mean;
}

}  // namespace

TrainedModel train_model(const Dataset& ds, const ModelConfig& cfg, Exec exec) {
    ds.validate();
    if (ds.size() == 0) throw ValidationError("train: empty dataset");

    TrainedModel m;
    m.kind = cfg.kind;
    m.feature_set = cfg.feature_set;
    m.target_kind = ds.target_kind;

    m.transform =
        ds.target_kind == TargetKind::wer ? TargetTransform::log10_eps : TargetTransform::identity;

    if (cfg.kind == ModelKind::baseline) {
        // The conventional model is a constant rate per operating cell; no
        // feature matrix or scaler involved.
        m.columns = {"t_refp_s", "temp_c"};
        m.device_order = ds.distinct_devices();
        m.params = train_baseline(ds, m.transform);
        return m;
    }

    TrainMatrix tm = assemble(ds, cfg.feature_set, m.transform);
    m.columns = tm.columns;
    m.device_order = tm.device_order;
    m.scaler = fit_scaler(tm.X);
    for (auto& row : tm.X) m.scaler.apply(row);

    switch (cfg.kind) {
        case ModelKind::knn:
            m.params = train_knn(std::move(tm.X), std::move(tm.y), cfg.k == 0 ? 5 : cfg.k);
            break;
        case ModelKind::rdf:
            m.params = detail::train_rdf(tm.X, tm.y, cfg, exec);
            break;
        case ModelKind::svr:
            m.params = detail::train_svr(tm.X, tm.y, cfg);
            break;
        case ModelKind::baseline:
            break;  // handled above
    }
    return m;
}

BoundModel bind_model(const TrainedModel& model, const std::vector<std::string>& schema) {
    BoundModel b;
    b.model = &model;
    for (const auto& col : model.columns) {
        if (col == "device_ordinal") continue;  // resolved from the device id
        auto it = std::find(schema.begin(), schema.end(), col);
        if (it == schema.end())
            throw ValidationError("query schema is missing model column " + col);
        b.feature_idx.push_back(static_cast<size_t>(it - schema.begin()));
    }
    return b;
}

double BoundModel::predict(std::span<const double> schema_row, const std::string& device) const {
    const TrainedModel& m = *model;

    if (m.kind == ModelKind::baseline) {
        const auto& p = std::get<BaselineParams>(m.params);
        const double refp = schema_row[feature_idx[0]];
        const double temp = schema_row[feature_idx[1]];
        double v = untransform_target(baseline_predict(p, device, refp, temp), m.transform);
        if (m.target_kind == TargetKind::p_ue) v = std::clamp(v, 0.0, 1.0);
        return std::max(0.0, v);
    }

    std::vector<double> x(m.columns.size());
    for (size_t j = 0; j < feature_idx.size(); ++j) x[j] = schema_row[feature_idx[j]];
    const auto it = std::lower_bound(m.device_order.begin(), m.device_order.end(), device);
    if (it == m.device_order.end() || *it != device)
        throw ValidationError("model was not trained on device " + device);
    x.back() = static_cast<double>(it - m.device_order.begin());
    m.scaler.apply(x);

    double v = 0.0;
    switch (m.kind) {
        case ModelKind::knn: v = knn_predict(std::get<KnnParams>(m.params), x); break;
        case ModelKind::rdf: v = detail::rdf_predict(std::get<RdfParams>(m.params), x); break;
        case ModelKind::svr: v = detail::svr_predict(std::get<SvrParams>(m.params), x); break;
        case ModelKind::baseline: break;
    }
    v = untransform_target(v, m.transform);
    if (!std::isfinite(v)) throw NumericError("prediction is not finite");
    if (m.target_kind == TargetKind::p_ue) v = std::clamp(v, 0.0, 1.0);
    return std::max(0.0, v);
}

double predict(const TrainedModel& model, const std::vector<std::string>& schema,
               std::span<const double> features, const std::string& device) {
    return bind_model(model, schema).predict(features, device);
}

double predict(const TrainedModel& model, const Dataset& ds, size_t row) {
    return bind_model(model, ds.feature_names).predict(ds.rows[row], ds.devices[row]);
}

// --- persistence ------------------------------------------------------------

namespace {

void write_strings(BinWriter& w, const std::vector<std::string>& v) {
    w.u32(static_cast<uint32_t>(v.size()));
    for (const auto& s : v) w.str(s);
}

std::vector<std::string> read_strings(BinReader& r, uint32_t max_n = 1u << 16) {
    const uint32_t n = r.u32();
    if (n > max_n) throw IoError(IoError::Kind::corrupt, "string list length out of range");
    std::vector<std::string> v(n);
    for (auto& s : v) s = r.str();
    return v;
}

void write_f64s(BinWriter& w, const std::vector<double>& v) {
    w.u64(v.size());
    for (double d : v) w.f64(d);
}

std::vector<double> read_f64s(BinReader& r, uint64_t max_n = 1ull << 28) {
    const uint64_t n = r.u64();
    if (n > max_n) throw IoError(IoError::Kind::corrupt, "vector length out of range");
    std::vector<double> v(n);
    for (auto& d : v) d = r.f64();
    return v;
}

void write_matrix(BinWriter& w, const std::vector<std::vector<double>>& m) {
    w.u64(m.size());
    w.u64(m.empty() ? 0 : m[0].size());
    for (const auto& row : m)
        for (double d : row) w.f64(d);
}

std::vector<std::vector<double>> read_matrix(BinReader& r) {
    const uint64_t n = r.u64();
    const uint64_t d = r.u64();
    if (n > (1ull << 28) || d > (1ull << 16))
        throw IoError(IoError::Kind::corrupt, "matrix dimensions out of range");
    std::vector<std::vector<double>> m(n, std::vector<double>(d));
    for (auto& row : m)
        for (auto& v : row) v = r.f64();
    return m;
}

}  // namespace

void write_model(const TrainedModel& m, std::ostream& sink) {
    BinWriter w(sink);
    w.bytes(kModelMagic, 4);
    w.u16(kModelVersion);
    w.u8(static_cast<uint8_t>(m.kind));
    w.u8(static_cast<uint8_t>(m.feature_set));
    w.u8(static_cast<uint8_t>(m.target_kind));
    w.u8(static_cast<uint8_t>(m.transform));
    write_strings(w, m.columns);
    write_strings(w, m.device_order);
    write_f64s(w, m.scaler.mean);
    write_f64s(w, m.scaler.sd);
    w.u64(m.scaler.constant.size());
    for (uint8_t c : m.scaler.constant) w.u8(c);

    switch (m.kind) {
        case ModelKind::knn: {
            const auto& p = std::get<KnnParams>(m.params);
            w.u32(p.k);
            write_matrix(w, p.points);
            write_f64s(w, p.targets);
            break;
        }
        case ModelKind::rdf: {
            const auto& p = std::get<RdfParams>(m.params);
            w.u32(static_cast<uint32_t>(p.trees.size()));
            for (const auto& tree : p.trees) {
                w.u32(static_cast<uint32_t>(tree.size()));
                for (const TreeNode& n : tree) {
                    w.u32(static_cast<uint32_t>(n.feature));
                    w.f64(n.threshold);
                    w.u32(n.left);
                    w.u32(n.right);
                    w.f64(n.value);
                }
            }
            break;
        }
        case ModelKind::svr: {
            const auto& p = std::get<SvrParams>(m.params);
            write_matrix(w, p.support);
            write_f64s(w, p.coef);
            w.f64(p.bias);
            w.f64(p.gamma);
            break;
        }
        case ModelKind::baseline: {
            const auto& p = std::get<BaselineParams>(m.params);
            auto write_cells = [&](const std::vector<BaselineParams::Cell>& cells) {
                w.u64(cells.size());
                for (const auto& c : cells) {
                    w.str(c.device);
                    w.f64(c.t_refp_s);
                    w.f64(c.temp_c);
                    w.f64(c.mean);
                    w.u64(c.n);
                }
            };
            write_cells(p.cells);
            write_cells(p.env_cells);
            break;
        }
    }
}

void write_model_file(const TrainedModel& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(IoError::Kind::open_failed, "cannot open " + path + " for writing");
    write_model(m, out);
}

TrainedModel read_model(std::istream& source) {
    BinReader r(source);
    expect_magic(r, kModelMagic, "model file");
    expect_version(r, kModelVersion, "model file");

    TrainedModel m;
    const uint8_t kind = r.u8();
    if (kind > 3) throw IoError(IoError::Kind::corrupt, "unknown model kind tag");
    m.kind = static_cast<ModelKind>(kind);
    const uint8_t set = r.u8();
    if (set < 1 || set > 3) throw IoError(IoError::Kind::corrupt, "unknown feature set tag");
    m.feature_set = static_cast<FeatureSetId>(set);
    const uint8_t target = r.u8();
    if (target > 1) throw IoError(IoError::Kind::corrupt, "unknown target kind tag");
    m.target_kind = static_cast<TargetKind>(target);
    const uint8_t tr = r.u8();
    if (tr > 1) throw IoError(IoError::Kind::corrupt, "unknown target transform tag");
    m.transform = static_cast<TargetTransform>(tr);

    m.columns = read_strings(r);
    m.device_order = read_strings(r);
    m.scaler.mean = read_f64s(r);
    m.scaler.sd = read_f64s(r);
    const uint64_t nc = r.u64();
    if (nc != m.scaler.mean.size())
        throw IoError(IoError::Kind::corrupt, "scaler block is inconsistent");
    m.scaler.constant.resize(nc);
    for (auto& c : m.scaler.constant) c = r.u8();

    switch (m.kind) {
        case ModelKind::knn: {
            KnnParams p;
            p.k = r.u32();
            p.points = read_matrix(r);
            p.targets = read_f64s(r);
            if (p.targets.size() != p.points.size())
                throw IoError(IoError::Kind::corrupt, "knn payload is inconsistent");
            m.params = std::move(p);
            break;
        }
        case ModelKind::rdf: {
            RdfParams p;
            const uint32_t n_trees = r.u32();
            if (n_trees > 1u << 20) throw IoError(IoError::Kind::corrupt, "tree count out of range");
            p.trees.resize(n_trees);
            for (auto& tree : p.trees) {
                const uint32_t n_nodes = r.u32();
                if (n_nodes > 1u << 28)
                    throw IoError(IoError::Kind::corrupt, "node count out of range");
                tree.resize(n_nodes);
                for (TreeNode& n : tree) {
                    n.feature = static_cast<int32_t>(r.u32());
                    n.threshold = r.f64();
                    n.left = r.u32();
                    n.right = r.u32();
                    n.value = r.f64();
                    if (n.feature >= 0 && (n.left >= n_nodes || n.right >= n_nodes))
                        throw IoError(IoError::Kind::corrupt, "tree child index out of range");
                }
            }
            m.params = std::move(p);
            break;
        }
        case ModelKind::svr: {
            SvrParams p;
            p.support = read_matrix(r);
            p.coef = read_f64s(r);
            p.bias = r.f64();
            p.gamma = r.f64();
            if (p.coef.size() != p.support.size())
                throw IoError(IoError::Kind::corrupt, "svr payload is inconsistent");
            m.params = std::move(p);
            break;
        }
        case ModelKind::baseline: {
            BaselineParams p;
            auto read_cells = [&]() {
                const uint64_t n = r.u64();
                if (n > 1ull << 24)
                    throw IoError(IoError::Kind::corrupt, "cell count out of range");
                std::vector<BaselineParams::Cell> cells(n);
                for (auto& c : cells) {
                    c.device = r.str();
                    c.t_refp_s = r.f64();
                    c.temp_c = r.f64();
                    c.mean = r.f64();
                    c.n = r.u64();
                }
                return cells;
            };
            p.cells = read_cells();
            p.env_cells = read_cells();
            m.params = std::move(p);
            break;
        }
    }
    return m;
}

TrainedModel read_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(IoError::Kind::open_failed, "cannot open " + path);
    return read_model(in);
}

}  // namespace dram_oracle
