#ifndef DRAM_ORACLE_KV_HPP
#define DRAM_ORACLE_KV_HPP

#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dram_oracle/errors.hpp"

namespace dram_oracle {

// Flat key=value store used by config files, workload spec files and the
// trace metadata block. '#' starts a comment, blank lines are skipped.
// Serialization is sorted by key so emitted files are byte-stable.
class KvMap {
public:
    void set(const std::string& k, const std::string& v) { m_[k] = v; }
    void set_f64(const std::string& k, double v) {
        std::ostringstream os;
        os.precision(17);
        os << v;
        m_[k] = os.str();
    }
    void set_u64(const std::string& k, uint64_t v) { m_[k] = std::to_string(v); }

    bool has(const std::string& k) const { return m_.count(k) != 0; }

    const std::string& get(const std::string& k) const {
        auto it = m_.find(k);
        if (it == m_.end()) throw ValidationError("missing key: " + k);
        return it->second;
    }
    std::string get_or(const std::string& k, const std::string& dflt) const {
        auto it = m_.find(k);
        return it == m_.end() ? dflt : it->second;
    }
    double get_f64(const std::string& k) const {
        const std::string& s = get(k);
        try {
            size_t pos = 0;
            double v = std::stod(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ValidationError("key " + k + ": not a number: '" + s + "'");
        }
    }
    double get_f64_or(const std::string& k, double dflt) const {
        return has(k) ? get_f64(k) : dflt;
    }
    uint64_t get_u64(const std::string& k) const {
        const std::string& s = get(k);
        try {
            size_t pos = 0;
            uint64_t v = std::stoull(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ValidationError("key " + k + ": not an integer: '" + s + "'");
        }
    }
    uint64_t get_u64_or(const std::string& k, uint64_t dflt) const {
        return has(k) ? get_u64(k) : dflt;
    }

    std::vector<double> get_f64_list(const std::string& k) const {
        std::vector<double> out;
        std::istringstream is(get(k));
        std::string tok;
        while (std::getline(is, tok, ','))
            if (!tok.empty()) out.push_back(std::stod(tok));
        return out;
    }
    std::vector<std::string> get_str_list(const std::string& k) const {
        std::vector<std::string> out;
        std::istringstream is(get(k));
        std::string tok;
        while (std::getline(is, tok, ','))
            if (!tok.empty()) out.push_back(tok);
        return out;
    }

    const std::map<std::string, std::string>& entries() const { return m_; }

    std::string serialize() const {
        std::ostringstream os;
        for (const auto& [k, v] : m_) os << k << "=" << v << "\n";
        return os.str();
    }

    static KvMap parse(const std::string& text) {
        KvMap kv;
        std::istringstream is(text);
        std::string line;
        size_t lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            size_t hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            size_t a = line.find_first_not_of(" \t\r");
            if (a == std::string::npos) continue;
            size_t b = line.find_last_not_of(" \t\r");
            line = line.substr(a, b - a + 1);
            size_t eq = line.find('=');
            if (eq == std::string::npos)
                throw ValidationError("line " + std::to_string(lineno) + ": expected key=value");
            std::string key = line.substr(0, eq);
            std::string val = line.substr(eq + 1);
            while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
            size_t vs = val.find_first_not_of(" \t");
            val = vs == std::string::npos ? "" : val.substr(vs);
            kv.m_[key] = val;
        }
        return kv;
    }

private:
    std::map<std::string, std::string> m_;
};

KvMap load_kv_file(const std::string& path);
void save_kv_file(const KvMap& kv, const std::string& path);

}  // namespace dram_oracle

#endif
