#include "dram_oracle/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "dram_oracle/errors.hpp"

namespace dram_oracle {

std::string to_string(TargetKind t) { return t == TargetKind::wer ? "wer" : "p_ue"; }

TargetKind target_kind_from_string(const std::string& s) {
    if (s == "wer") return TargetKind::wer;
    if (s == "p_ue" || s == "pue") return TargetKind::p_ue;
    throw ValidationError("unknown target kind: " + s);
}

void Dataset::add_row(const FeatureVector& fv, double target) {
    if (feature_names.empty()) feature_names = feature_schema();
    workloads.push_back(fv.workload);
    devices.push_back(fv.device);
    rows.push_back(feature_values(fv));
    targets.push_back(target);
}

std::map<std::string, std::vector<size_t>> Dataset::workload_index() const {
    std::map<std::string, std::vector<size_t>> idx;
    for (size_t i = 0; i < workloads.size(); ++i) idx[workloads[i]].push_back(i);
    return idx;
}

std::vector<std::string> Dataset::distinct_devices() const {
    std::set<std::string> s(devices.begin(), devices.end());
    return {s.begin(), s.end()};
}

size_t Dataset::column(const std::string& name) const {
    for (size_t i = 0; i < feature_names.size(); ++i)
        if (feature_names[i] == name) return i;
    throw ValidationError("dataset has no column named " + name);
}

void Dataset::validate() const {
    if (rows.size() != targets.size() || rows.size() != workloads.size() ||
        rows.size() != devices.size())
        throw ValidationError("dataset row/target/label counts disagree");
    for (size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != feature_names.size())
            throw ValidationError("dataset row width mismatch at row " + std::to_string(i));
        if (!(targets[i] >= 0.0))
            throw ValidationError("dataset target must be >= 0 at row " + std::to_string(i));
        if (targets[i] > 1.0)
            throw ValidationError("dataset target must be <= 1 at row " + std::to_string(i));
    }
}

namespace {

std::string fmt_f64(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

void write_dataset_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError(IoError::Kind::open_failed, "cannot open " + path + " for writing");
    out << "workload,device";
    for (const auto& n : ds.feature_names) out << "," << n;
    out << "," << to_string(ds.target_kind) << "\n";
    for (size_t i = 0; i < ds.rows.size(); ++i) {
        out << ds.workloads[i] << "," << ds.devices[i];
        for (double v : ds.rows[i]) out << "," << fmt_f64(v);
        out << "," << fmt_f64(ds.targets[i]) << "\n";
    }
    if (!out) throw IoError(IoError::Kind::write_failed, "short write to " + path);
}

Dataset read_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(IoError::Kind::open_failed, "cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw IoError(IoError::Kind::truncated, path + ": empty file");
    const std::vector<std::string> header = split_csv_line(line);
    if (header.size() < 4 || header[0] != "workload" || header[1] != "device")
        throw IoError(IoError::Kind::corrupt, path + ": unexpected CSV header");

    Dataset ds;
    ds.target_kind = target_kind_from_string(header.back());
    ds.feature_names.assign(header.begin() + 2, header.end() - 1);

    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::vector<std::string> f = split_csv_line(line);
        if (f.size() != header.size())
            throw IoError(IoError::Kind::corrupt,
                          path + ": row " + std::to_string(lineno) + " has wrong column count");
        ds.workloads.push_back(f[0]);
        ds.devices.push_back(f[1]);
        std::vector<double> row(ds.feature_names.size());
        try {
            for (size_t i = 0; i < row.size(); ++i) row[i] = std::stod(f[2 + i]);
            ds.targets.push_back(std::stod(f.back()));
        } catch (const std::exception&) {
            throw IoError(IoError::Kind::corrupt,
                          path + ": row " + std::to_string(lineno) + " has a non-numeric field");
        }
        ds.rows.push_back(std::move(row));
    }
    ds.validate();
    return ds;
}

std::vector<std::pair<std::string, double>> rank_features(const Dataset& ds) {
    if (ds.size() < 3) throw ValidationError("rank_features: need at least 3 samples");

    bool target_varies = false;
    for (double t : ds.targets)
        if (t != ds.targets.front()) {
            target_varies = true;
            break;
        }
    if (!target_varies) throw NumericError("rank_features: constant target");

    // Environment and device identity are model inputs, not program features;
    // only program features are ranked.
    static const std::set<std::string> kExcluded = {"temp_c", "t_refp_s", "v_dd"};

    std::vector<std::pair<std::string, double>> out;
    std::vector<double> col(ds.size());
    for (size_t c = 0; c < ds.feature_names.size(); ++c) {
        if (kExcluded.count(ds.feature_names[c])) continue;
        for (size_t i = 0; i < ds.size(); ++i) col[i] = ds.rows[i][c];
        double rs = 0.0;
        try {
            rs = spearman(col, ds.targets);
        } catch (const NumericError&) {
            rs = 0.0;  // constant feature: no detectable association
        }
        out.emplace_back(ds.feature_names[c], rs);
    }

    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        const double ma = std::fabs(a.second), mb = std::fabs(b.second);
        if (ma != mb) return ma > mb;
        return a.first < b.first;
    });
    return out;
}

}  // namespace dram_oracle
