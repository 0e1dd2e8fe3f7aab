#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "vsrflow/common.hpp"
#include "vsrflow/tensor.hpp"

namespace vsrflow {

// UMVT tensor dump: magic "UMVT", version u8=1, rank u8, dims u32 LE,
// dtype u8 (0 = f32), payload row-major f32 LE.
namespace umvt {

inline void put_u32_le(std::string& out, uint32_t v) {
    out.push_back(char(v & 0xff));
    out.push_back(char((v >> 8) & 0xff));
    out.push_back(char((v >> 16) & 0xff));
    out.push_back(char((v >> 24) & 0xff));
}

inline uint32_t get_u32_le(const unsigned char* p) {
    return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 | uint32_t(p[3]) << 24;
}

inline std::string encode(const Tensor<float>& t) {
    std::string out;
    out.reserve(8 + t.dims.size() * 4 + t.data.size() * 4);
    out += "UMVT";
    out.push_back(char(1));          // version
    out.push_back(char(t.rank()));   // rank
    for (int64_t d : t.dims) {
        check_contract(d > 0 && d <= int64_t(UINT32_MAX), "umvt: extent out of range");
        put_u32_le(out, uint32_t(d));
    }
    out.push_back(char(0));  // dtype f32
    for (float v : t.data) {
        uint32_t bits;
        std::memcpy(&bits, &v, 4);
        put_u32_le(out, bits);
    }
    return out;
}

inline Tensor<float> decode(const unsigned char* p, size_t len) {
    if (len < 6 || std::memcmp(p, "UMVT", 4) != 0) throw IoError("umvt: bad magic");
    if (p[4] != 1) throw IoError("umvt: unsupported version");
    int rank = int(p[5]);
    size_t need = 6 + size_t(rank) * 4 + 1;
    if (len < need) throw IoError("umvt: truncated header");
    std::vector<int64_t> dims(static_cast<size_t>(rank));
    size_t off = 6;
    int64_t n = 1;
    for (int i = 0; i < rank; ++i) {
        dims[size_t(i)] = int64_t(get_u32_le(p + off));
        if (dims[size_t(i)] <= 0) throw IoError("umvt: bad extent");
        n *= dims[size_t(i)];
        off += 4;
    }
    if (p[off] != 0) throw IoError("umvt: unsupported dtype code");
    off += 1;
    if (len < off + size_t(n) * 4) throw IoError("umvt: truncated payload");
    std::vector<float> data(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) {
        uint32_t bits = get_u32_le(p + off + size_t(i) * 4);
        std::memcpy(&data[size_t(i)], &bits, 4);
    }
    return Tensor<float>(std::move(dims), std::move(data));
}

inline size_t encoded_size(const Tensor<float>& t) {
    return 6 + t.dims.size() * 4 + 1 + t.data.size() * 4;
}

}  // namespace umvt

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for read: " + path);
    std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return s;
}

inline void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for write: " + path);
    out.write(bytes.data(), std::streamsize(bytes.size()));
    if (!out) throw IoError("write failed: " + path);
}

inline void save_tensor(const std::string& path, const Tensor<float>& t) {
    write_file(path, umvt::encode(t));
}

inline Tensor<float> load_tensor(const std::string& path) {
    std::string bytes = read_file(path);
    return umvt::decode(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size());
}

// Checkpoint container: magic "VSRC", version u8=1, u64 LE manifest length,
// manifest JSON (meta + per-tensor name/offset/dims), then concatenated UMVT
// blobs. Offsets are relative to the payload base.
struct Checkpoint {
    std::map<std::string, Tensor<float>> tensors;
    nlohmann::json meta;
};

inline void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    std::string payload;
    nlohmann::json manifest;
    manifest["meta"] = ckpt.meta;
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& [name, t] : ckpt.tensors) {
        nlohmann::json e;
        e["name"] = name;
        e["offset"] = payload.size();
        e["dims"] = t.dims;
        entries.push_back(e);
        payload += umvt::encode(t);
    }
    manifest["tensors"] = entries;
    std::string mtext = manifest.dump();
    std::string out;
    out += "VSRC";
    out.push_back(char(1));
    uint64_t mlen = mtext.size();
    for (int i = 0; i < 8; ++i) out.push_back(char((mlen >> (8 * i)) & 0xff));
    out += mtext;
    out += payload;
    write_file(path, out);
}

inline Checkpoint load_checkpoint(const std::string& path) {
    std::string bytes = read_file(path);
    if (bytes.size() < 13 || bytes.compare(0, 4, "VSRC") != 0)
        throw IoError("checkpoint: bad magic in " + path);
    if (bytes[4] != 1) throw IoError("checkpoint: unsupported version");
    uint64_t mlen = 0;
    for (int i = 0; i < 8; ++i) mlen |= uint64_t(uint8_t(bytes[size_t(5 + i)])) << (8 * i);
    if (bytes.size() < 13 + mlen) throw IoError("checkpoint: truncated manifest");
    nlohmann::json manifest = nlohmann::json::parse(bytes.substr(13, mlen));
    const unsigned char* base = reinterpret_cast<const unsigned char*>(bytes.data()) + 13 + mlen;
    size_t payload_len = bytes.size() - 13 - size_t(mlen);
    Checkpoint ckpt;
    ckpt.meta = manifest.value("meta", nlohmann::json::object());
    for (const auto& e : manifest.at("tensors")) {
        size_t off = e.at("offset").get<size_t>();
        if (off > payload_len) throw IoError("checkpoint: offset out of range");
        ckpt.tensors[e.at("name").get<std::string>()] =
            umvt::decode(base + off, payload_len - off);
    }
    return ckpt;
}

}  // namespace vsrflow
