#include "dram_oracle/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace dram_oracle {

MpeResult mpe(std::span<const double> predictions, std::span<const double> actuals) {
    if (predictions.size() != actuals.size()) throw ValidationError("mpe: length mismatch");
    if (predictions.empty()) throw ValidationError("mpe: empty input");

    MpeResult r;
    double sum = 0.0;
    for (size_t i = 0; i < predictions.size(); ++i) {
        if (actuals[i] == 0.0) {
            ++r.n_zero_excluded;
            continue;
        }
        sum += std::fabs(predictions[i] - actuals[i]) / actuals[i];
        ++r.n_used;
    }
    if (r.n_used == 0) throw NumericError("mpe: all actual values are zero");
    r.percent = 100.0 * sum / static_cast<double>(r.n_used);
    return r;
}

namespace {

Dataset subset(const Dataset& ds, const std::vector<size_t>& idx) {
    Dataset out;
    out.feature_names = ds.feature_names;
    out.target_kind = ds.target_kind;
    for (size_t i : idx) {
        out.workloads.push_back(ds.workloads[i]);
        out.devices.push_back(ds.devices[i]);
        out.rows.push_back(ds.rows[i]);
        out.targets.push_back(ds.targets[i]);
    }
    return out;
}

struct FoldResult {
    std::vector<size_t> test_idx;
    std::vector<double> pred;
    double train_ms = 0.0;
};

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

CrossValReport loo_by_workload(const Dataset& ds, const ModelConfig& cfg, Exec exec) {
    ds.validate();
    const auto index = ds.workload_index();
    if (index.size() < 2)
        throw ValidationError("loo_by_workload: need at least 2 distinct workloads");
    for (const auto& [w, idx] : index)
        if (idx.size() == ds.size())
            throw ValidationError("loo_by_workload: workload " + w + " owns every sample");

    std::vector<std::string> fold_names;
    for (const auto& [w, idx] : index) fold_names.push_back(w);

    std::vector<FoldResult> folds(fold_names.size());

    auto run_fold = [&](size_t f) {
        const std::string& held_out = fold_names[f];
        std::vector<size_t> train_idx, test_idx;
        for (size_t i = 0; i < ds.size(); ++i)
            (ds.workloads[i] == held_out ? test_idx : train_idx).push_back(i);

        const Dataset train = subset(ds, train_idx);
        const auto t0 = std::chrono::steady_clock::now();
        const TrainedModel model = train_model(train, cfg, Exec::serial);
        const auto t1 = std::chrono::steady_clock::now();

        FoldResult fr;
        fr.test_idx = test_idx;
        fr.train_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        const BoundModel bound = bind_model(model, ds.feature_names);
        for (size_t i : test_idx) fr.pred.push_back(bound.predict(ds.rows[i], ds.devices[i]));
        folds[f] = std::move(fr);
    };

    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int64_t f = 0; f < static_cast<int64_t>(fold_names.size()); ++f)
            run_fold(static_cast<size_t>(f));
    } else {
        for (size_t f = 0; f < fold_names.size(); ++f) run_fold(f);
    }

    CrossValReport rep;
    rep.kind = cfg.kind;
    rep.feature_set = cfg.feature_set;
    rep.target_kind = ds.target_kind;
    rep.knn_k = cfg.kind == ModelKind::knn ? cfg.k : 0;

    // Percentage errors are pooled per sample; the group views are means over
    // each group's own samples.
    double total = 0.0;
    std::map<std::string, double> wl_sum, dev_sum;
    for (const FoldResult& fr : folds) {
        rep.train_ms_total += fr.train_ms;
        for (size_t t = 0; t < fr.test_idx.size(); ++t) {
            const size_t i = fr.test_idx[t];
            if (ds.targets[i] == 0.0) {
                ++rep.n_zero_excluded;
                continue;
            }
            const double pe = 100.0 * std::fabs(fr.pred[t] - ds.targets[i]) / ds.targets[i];
            total += pe;
            ++rep.n_used;
            wl_sum[ds.workloads[i]] += pe;
            ++rep.per_workload_n[ds.workloads[i]];
            dev_sum[ds.devices[i]] += pe;
            ++rep.per_device_n[ds.devices[i]];
        }
    }
    if (rep.n_used == 0) throw NumericError("loo_by_workload: all actual values are zero");
    rep.overall_mpe = total / static_cast<double>(rep.n_used);
    for (const auto& [w, s] : wl_sum)
        rep.per_workload_mpe[w] = s / static_cast<double>(rep.per_workload_n[w]);
    for (const auto& [d, s] : dev_sum)
        rep.per_device_mpe[d] = s / static_cast<double>(rep.per_device_n[d]);

    // Single-query latency: median of 100 repeated predictions with a model
    // trained on the full dataset.
    {
        const TrainedModel model = train_model(ds, cfg, exec);
        const BoundModel bound = bind_model(model, ds.feature_names);
        std::vector<double> us;
        us.reserve(100);
        volatile double sink = 0.0;
        for (int rep_i = 0; rep_i < 100; ++rep_i) {
            const size_t i = static_cast<size_t>(rep_i) % ds.size();
            const auto q0 = std::chrono::steady_clock::now();
            sink = bound.predict(ds.rows[i], ds.devices[i]);
            const auto q1 = std::chrono::steady_clock::now();
            us.push_back(std::chrono::duration<double, std::micro>(q1 - q0).count());
        }
        (void)sink;
        rep.predict_us_median = median(us);
    }
    return rep;
}

std::vector<CrossValReport> compare_models(const Dataset& ds,
                                           const std::vector<ModelConfig>& configs, Exec exec) {
    std::vector<CrossValReport> out;
    for (const ModelConfig& cfg : configs) {
        if (cfg.kind == ModelKind::knn && cfg.k == 0) {
            // Hyperparameter sweep: report the best k.
            CrossValReport best;
            bool first = true;
            for (uint32_t k : {1u, 3u, 5u, 7u}) {
                ModelConfig c = cfg;
                c.k = k;
                const CrossValReport r = loo_by_workload(ds, c, exec);
                if (first || r.overall_mpe < best.overall_mpe) {
                    best = r;
                    first = false;
                }
            }
            out.push_back(best);
        } else {
            out.push_back(loo_by_workload(ds, cfg, exec));
        }
    }
    return out;
}

namespace {

std::string set_name(FeatureSetId id) {
    switch (id) {
        case FeatureSetId::set1: return "set1";
        case FeatureSetId::set2: return "set2";
        case FeatureSetId::set3: return "set3";
    }
    return "set1";
}

}  // namespace

std::string report_csv(const std::vector<CrossValReport>& reports) {
    std::ostringstream os;
    os << "model,feature_set,target,knn_k,overall_mpe_percent,n_used,n_zero_excluded,"
          "train_ms_total,predict_us_median\n";
    os.precision(10);
    for (const auto& r : reports) {
        os << to_string(r.kind) << "," << set_name(r.feature_set) << ","
           << to_string(r.target_kind) << "," << r.knn_k << "," << r.overall_mpe << ","
           << r.n_used << "," << r.n_zero_excluded << "," << r.train_ms_total << ","
           << r.predict_us_median << "\n";
    }
    return os.str();
}

std::string report_summary(const std::vector<CrossValReport>& reports) {
    std::ostringstream os;
    os.precision(4);
    for (const auto& r : reports) {
        os << to_string(r.kind) << "/" << set_name(r.feature_set);
        if (r.knn_k) os << " (k=" << r.knn_k << ")";
        os << " target=" << to_string(r.target_kind) << ": overall MPE " << r.overall_mpe
           << "% over " << r.n_used << " samples";
        if (r.n_zero_excluded) os << " (" << r.n_zero_excluded << " zero-actual excluded)";
        os << ", median predict " << r.predict_us_median << " us\n";
        os << "  per workload:";
        for (const auto& [w, v] : r.per_workload_mpe) os << " " << w << "=" << v << "%";
        os << "\n  per device:";
        for (const auto& [d, v] : r.per_device_mpe) os << " " << d << "=" << v << "%";
        os << "\n";
    }
    return os.str();
}

void write_bar_chart_svg(const std::string& path, const std::string& title,
                         const std::map<std::string, double>& bars) {
    const int bar_w = 36, gap = 14, chart_h = 220, margin = 60;
    const int width = margin * 2 + static_cast<int>(bars.size()) * (bar_w + gap);
    const int height = chart_h + 110;
    double vmax = 0.0;
    for (const auto& [k, v] : bars) vmax = std::max(vmax, v);
    if (vmax <= 0.0) vmax = 1.0;

    std::ofstream out(path);
    if (!out) throw IoError(IoError::Kind::open_failed, "cannot open " + path + " for writing");
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\">\n";
    out << "<text x=\"" << margin << "\" y=\"20\" font-size=\"14\">" << title << "</text>\n";
    out << "<line x1=\"" << margin << "\" y1=\"" << 30 + chart_h << "\" x2=\"" << width - margin
        << "\" y2=\"" << 30 + chart_h << "\" stroke=\"black\"/>\n";
    int x = margin;
    out.precision(4);
    for (const auto& [k, v] : bars) {
        const int h = static_cast<int>(chart_h * (v / vmax));
        out << "<rect x=\"" << x << "\" y=\"" << 30 + chart_h - h << "\" width=\"" << bar_w
            << "\" height=\"" << h << "\" fill=\"#4878a8\"/>\n";
        out << "<text x=\"" << x << "\" y=\"" << 30 + chart_h - h - 4 << "\" font-size=\"10\">"
            << v << "</text>\n";
        out << "<text x=\"" << x << "\" y=\"" << 30 + chart_h + 14
            << "\" font-size=\"9\" transform=\"rotate(35 " << x << " " << 30 + chart_h + 14
            << ")\">" << k << "</text>\n";
        x += bar_w + gap;
    }
    out << "</svg>\n";
    if (!out) throw IoError(IoError::Kind::write_failed, "short write to " + path);
}

}  // namespace dram_oracle
