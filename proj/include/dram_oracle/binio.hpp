#ifndef DRAM_ORACLE_BINIO_HPP
#define DRAM_ORACLE_BINIO_HPP

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "dram_oracle/errors.hpp"

namespace dram_oracle {

// Little-endian primitives shared by the trace, profile and model formats.

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; big-endian hosts are unsupported");

class BinWriter {
public:
    explicit BinWriter(std::ostream& os) : os_(os) {}

    void bytes(const void* p, size_t n) {
        os_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
        if (!os_) throw IoError(IoError::Kind::write_failed, "short write");
    }
    void u8(uint8_t v) { bytes(&v, 1); }
    void u16(uint16_t v) { bytes(&v, 2); }
    void u32(uint32_t v) { bytes(&v, 4); }
    void u64(uint64_t v) { bytes(&v, 8); }
    void f64(double v) {
        uint64_t b;
        std::memcpy(&b, &v, 8);
        u64(b);
    }
    void str(const std::string& s) {
        u32(static_cast<uint32_t>(s.size()));
        bytes(s.data(), s.size());
    }

private:
    std::ostream& os_;
};

class BinReader {
public:
    explicit BinReader(std::istream& is) : is_(is) {}

    void bytes(void* p, size_t n) {
        is_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (static_cast<size_t>(is_.gcount()) != n)
            throw IoError(IoError::Kind::truncated, "unexpected end of file");
    }
    uint8_t u8() {
        uint8_t v;
        bytes(&v, 1);
        return v;
    }
    uint16_t u16() {
        uint16_t v;
        bytes(&v, 2);
        return v;
    }
    uint32_t u32() {
        uint32_t v;
        bytes(&v, 4);
        return v;
    }
    uint64_t u64() {
        uint64_t v;
        bytes(&v, 8);
        return v;
    }
    double f64() {
        uint64_t b = u64();
        double v;
        std::memcpy(&v, &b, 8);
        return v;
    }
    std::string str(uint32_t max_len = 1u << 20) {
        uint32_t n = u32();
        if (n > max_len) throw IoError(IoError::Kind::corrupt, "string length out of range");
        std::string s(n, '\0');
        if (n) bytes(s.data(), n);
        return s;
    }
    bool at_eof() {
        is_.peek();
        return is_.eof();
    }

private:
    std::istream& is_;
};

inline void expect_magic(BinReader& r, const char magic[4], const std::string& what) {
    char got[4];
    r.bytes(got, 4);
    if (std::memcmp(got, magic, 4) != 0)
        throw IoError(IoError::Kind::bad_magic, "bad magic for " + what);
}

inline uint16_t expect_version(BinReader& r, uint16_t supported, const std::string& what) {
    uint16_t v = r.u16();
    if (v != supported)
        throw IoError(IoError::Kind::unsupported_version,
                      what + " version " + std::to_string(v) + " unsupported");
    return v;
}

}  // namespace dram_oracle

#endif
