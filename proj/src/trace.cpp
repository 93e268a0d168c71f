#include "dram_oracle/trace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "dram_oracle/binio.hpp"
#include "dram_oracle/rng.hpp"

namespace dram_oracle {

std::string to_string(ReuseProfile p) {
    switch (p) {
        case ReuseProfile::uniform: return "uniform";
        case ReuseProfile::zipfian: return "zipfian";
        case ReuseProfile::streaming: return "streaming";
    }
    return "uniform";
}

ReuseProfile reuse_profile_from_string(const std::string& s) {
    if (s == "uniform") return ReuseProfile::uniform;
    if (s == "zipfian") return ReuseProfile::zipfian;
    if (s == "streaming") return ReuseProfile::streaming;
    throw ValidationError("unknown reuse_profile: " + s);
}

void WorkloadSpec::validate(uint64_t capacity_words) const {
    if (name.empty()) throw ValidationError("workload name must be non-empty");
    if (name.find(',') != std::string::npos || name.find('\n') != std::string::npos)
        throw ValidationError("workload name must not contain ',' or newlines");
    if (n_instructions == 0) throw ValidationError("n_instructions must be positive");
    if (footprint_words == 0) throw ValidationError("footprint_words must be positive");
    if (!(target_access_rate > 0.0) || target_access_rate > 1.0)
        throw ValidationError("target_access_rate must be in (0, 1]");
    if (!(cpi > 0.0)) throw ValidationError("cpi must be positive");
    if (target_access_rate * cpi > 1.0 + 1e-12)
        throw ValidationError(
            "target_access_rate * cpi exceeds 1 access per instruction; "
            "instruction indices could not be strictly increasing");
    if (write_fraction < 0.0 || write_fraction > 1.0)
        throw ValidationError("write_fraction must be in [0, 1]");
    if (value_alphabet_size < 1) throw ValidationError("value_alphabet_size must be >= 1");
    if (reuse_profile == ReuseProfile::zipfian) {
        if (!(zipf_s > 0.0)) throw ValidationError("zipf_s must be positive");
        if (footprint_words > (1ull << 24))
            throw ValidationError("zipfian footprint limited to 2^24 words");
    }
    if (threads < 1) throw ValidationError("threads must be >= 1");
    if (capacity_words != 0 && footprint_words > capacity_words)
        throw ValidationError("footprint_words " + std::to_string(footprint_words) +
                              " exceeds device capacity " + std::to_string(capacity_words));
}

KvMap WorkloadSpec::to_kv() const {
    KvMap kv;
    kv.set("name", name);
    kv.set_u64("n_instructions", n_instructions);
    kv.set_u64("footprint_words", footprint_words);
    kv.set_f64("target_access_rate", target_access_rate);
    kv.set_f64("cpi", cpi);
    kv.set_f64("write_fraction", write_fraction);
    kv.set_u64("value_alphabet_size", value_alphabet_size);
    kv.set("reuse_profile", to_string(reuse_profile));
    kv.set_f64("zipf_s", zipf_s);
    kv.set_u64("threads", threads);
    kv.set_u64("seed", seed);
    return kv;
}

WorkloadSpec WorkloadSpec::from_kv(const KvMap& kv) {
    WorkloadSpec s;
    s.name = kv.get("name");
    s.n_instructions = kv.get_u64("n_instructions");
    s.footprint_words = kv.get_u64("footprint_words");
    s.target_access_rate = kv.get_f64("target_access_rate");
    s.cpi = kv.get_f64("cpi");
    s.write_fraction = kv.get_f64_or("write_fraction", 0.5);
    s.value_alphabet_size = static_cast<uint32_t>(kv.get_u64_or("value_alphabet_size", 1));
    s.reuse_profile = reuse_profile_from_string(kv.get_or("reuse_profile", "uniform"));
    s.zipf_s = kv.get_f64_or("zipf_s", 1.0);
    s.threads = static_cast<uint32_t>(kv.get_u64_or("threads", 1));
    s.seed = kv.get_u64_or("seed", 0);
    return s;
}

namespace {

// Domain separators for the counter-based generator streams.
constexpr uint64_t kAddrStream = 0x61646472;
constexpr uint64_t kKindStream = 0x6b696e64;
constexpr uint64_t kValStream = 0x76616c75;
constexpr uint64_t kAlphabetStream = 0x616c7068;
constexpr uint64_t kScatterStream = 0x73636174;

// Rank -> word bijection spreading zipf heads across the footprint so hot
// rows are not artificially clustered.
struct Scatter {
    uint64_t mult = 1;
    uint64_t offset = 0;
    uint64_t n = 1;
    Scatter(uint64_t footprint, uint64_t seed) : n(footprint) {
        mult = mix(seed, kScatterStream) % n;
        if (mult == 0) mult = 1;
        while (std::gcd(mult, n) != 1) mult = (mult + 1) % n ? (mult + 1) % n : 1;
        offset = mix(seed, kScatterStream, 1) % n;
    }
    uint64_t operator()(uint64_t rank) const {
        return (static_cast<unsigned __int128>(rank) * mult + offset) % n;
    }
};

struct ZipfTable {
    std::vector<double> cdf;  // cdf[i] = P(rank <= i), normalized

    ZipfTable(uint64_t n, double s) {
        cdf.resize(n);
        double acc = 0.0;
        for (uint64_t i = 0; i < n; ++i) {
            acc += std::pow(static_cast<double>(i + 1), -s);
            cdf[i] = acc;
        }
        for (auto& v : cdf) v /= acc;
    }
    uint64_t sample(double u) const {
        auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
        if (it == cdf.end()) return cdf.size() - 1;
        return static_cast<uint64_t>(it - cdf.begin());
    }
};

}  // namespace

MemoryTrace generate_trace(const WorkloadSpec& spec, uint64_t capacity_words, Exec exec) {
    spec.validate(capacity_words);

    const double step = 1.0 / (spec.target_access_rate * spec.cpi);  // instructions per access
    const uint64_t n_acc = static_cast<uint64_t>(
        std::ceil(static_cast<double>(spec.n_instructions) / step - 1e-9));

    MemoryTrace trace;
    trace.spec = spec;
    trace.accesses.resize(n_acc);

    const ZipfTable* zipf = nullptr;
    ZipfTable zipf_storage(1, 1.0);
    if (spec.reuse_profile == ReuseProfile::zipfian) {
        zipf_storage = ZipfTable(spec.footprint_words, spec.zipf_s);
        zipf = &zipf_storage;
    }
    const Scatter scatter(spec.footprint_words, spec.seed);
    const uint64_t seed = spec.seed;
    const uint32_t burst = spec.threads;

    auto make_access = [&](uint64_t k) {
        MemoryAccess a;
        a.instr_index = static_cast<uint64_t>(static_cast<double>(k) * step);
        if (a.instr_index >= spec.n_instructions) a.instr_index = spec.n_instructions - 1;
        const uint64_t group = k / burst;  // threads share each selected word
        uint64_t word = 0;
        switch (spec.reuse_profile) {
            case ReuseProfile::uniform:
                word = mix(seed, kAddrStream, group) % spec.footprint_words;
                break;
            case ReuseProfile::zipfian:
                word = scatter(zipf->sample(u01(mix(seed, kAddrStream, group))));
                break;
            case ReuseProfile::streaming:
                word = group % spec.footprint_words;
                break;
        }
        a.address = word * 8;
        const bool is_write = u01(mix(seed, kKindStream, k)) < spec.write_fraction;
        a.kind = is_write ? AccessKind::write : AccessKind::read;
        if (is_write) {
            const uint64_t sym = mix(seed, kValStream, k) % spec.value_alphabet_size;
            a.value = static_cast<uint32_t>(mix(seed, kAlphabetStream, sym));
        }
        return a;
    };

    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (int64_t k = 0; k < static_cast<int64_t>(n_acc); ++k)
            trace.accesses[static_cast<size_t>(k)] = make_access(static_cast<uint64_t>(k));
    } else {
        for (uint64_t k = 0; k < n_acc; ++k) trace.accesses[k] = make_access(k);
    }

    // floor(k*step) can repeat at the tail clamp; instruction indices must be
    // strictly increasing, so fix up any collisions (rare, end of trace only).
    for (size_t i = 1; i < trace.accesses.size(); ++i)
        if (trace.accesses[i].instr_index <= trace.accesses[i - 1].instr_index)
            trace.accesses[i].instr_index = trace.accesses[i - 1].instr_index + 1;

    return trace;
}

uint64_t write_trace(const MemoryTrace& trace, std::ostream& sink) {
    BinWriter w(sink);
    uint64_t bytes = 0;
    w.bytes(kTraceMagic, 4);
    w.u16(kTraceVersion);
    bytes += 6;

    const KvMap meta = trace.spec.to_kv();
    w.u32(static_cast<uint32_t>(meta.entries().size()));
    bytes += 4;
    for (const auto& [k, v] : meta.entries()) {
        const std::string pair = k + "=" + v;
        w.str(pair);
        bytes += 4 + pair.size();
    }

    w.u64(trace.accesses.size());
    bytes += 8;
    for (const MemoryAccess& a : trace.accesses) {
        w.u64(a.instr_index);
        w.u64(a.address);
        w.u8(static_cast<uint8_t>(a.kind));
        w.u32(a.kind == AccessKind::write ? a.value : 0);
        const uint8_t pad[3] = {0, 0, 0};
        w.bytes(pad, 3);
        bytes += kTraceRecordSize;
    }
    return bytes;
}

uint64_t write_trace_file(const MemoryTrace& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(IoError::Kind::open_failed, "cannot open " + path + " for writing");
    return write_trace(trace, out);
}

MemoryTrace read_trace(std::istream& source) {
    BinReader r(source);
    expect_magic(r, kTraceMagic, "trace file");
    expect_version(r, kTraceVersion, "trace file");

    const uint32_t n_meta = r.u32();
    if (n_meta > 4096) throw IoError(IoError::Kind::corrupt, "metadata pair count out of range");
    KvMap meta;
    for (uint32_t i = 0; i < n_meta; ++i) {
        const std::string pair = r.str();
        const size_t eq = pair.find('=');
        if (eq == std::string::npos)
            throw IoError(IoError::Kind::corrupt, "metadata pair without '='");
        meta.set(pair.substr(0, eq), pair.substr(eq + 1));
    }

    MemoryTrace trace;
    try {
        trace.spec = WorkloadSpec::from_kv(meta);
    } catch (const ValidationError& e) {
        throw IoError(IoError::Kind::corrupt, std::string("trace metadata: ") + e.what());
    }

    const uint64_t n_records = r.u64();
    trace.accesses.resize(n_records);
    for (uint64_t i = 0; i < n_records; ++i) {
        MemoryAccess& a = trace.accesses[i];
        a.instr_index = r.u64();
        a.address = r.u64();
        const uint8_t kind = r.u8();
        if (kind > 1) throw IoError(IoError::Kind::corrupt, "invalid access kind");
        a.kind = static_cast<AccessKind>(kind);
        a.value = r.u32();
        uint8_t pad[3];
        r.bytes(pad, 3);
    }
    return trace;
}

MemoryTrace read_trace_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(IoError::Kind::open_failed, "cannot open " + path);
    return read_trace(in);
}

TraceStats trace_stats(const MemoryTrace& trace, uint32_t words_per_row) {
    TraceStats st;
    st.words.reserve(trace.spec.footprint_words);
    for (const MemoryAccess& a : trace.accesses) {
        const uint64_t word = a.address / 8;
        if (a.kind == AccessKind::write)
            ++st.n_writes;
        else
            ++st.n_reads;

        auto [it, inserted] = st.words.try_emplace(word);
        WordStat& ws = it->second;
        if (inserted) {
            ws.first_instr = a.instr_index;
        } else {
            const uint64_t gap = a.instr_index - ws.last_instr;
            ws.gap_sum_instr += gap;
            ws.gap_min_instr = ws.count == 1 ? gap : std::min(ws.gap_min_instr, gap);
        }
        ws.last_instr = a.instr_index;
        ++ws.count;
        if (a.kind == AccessKind::write) {
            ws.written = true;
            ws.final_value = a.value;  // last writer wins
        }
    }
    st.distinct_words = st.words.size();

    if (words_per_row > 0) {
        uint64_t max_row = 0;
        for (const auto& [word, ws] : st.words) max_row = std::max(max_row, word / words_per_row);
        st.row_counts.assign(max_row + 1, 0);
        for (const auto& [word, ws] : st.words) st.row_counts[word / words_per_row] += ws.count;
    }
    return st;
}

}  // namespace dram_oracle
