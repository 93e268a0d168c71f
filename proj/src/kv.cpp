#include "dram_oracle/kv.hpp"

#include <fstream>
#include <sstream>

namespace dram_oracle {

KvMap load_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(IoError::Kind::open_failed, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return KvMap::parse(buf.str());
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

void save_kv_file(const KvMap& kv, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError(IoError::Kind::open_failed, "cannot open " + path + " for writing");
    out << kv.serialize();
    if (!out) throw IoError(IoError::Kind::write_failed, "short write to " + path);
}

}  // namespace dram_oracle
