#include "haze/core/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "haze/core/errors.hpp"

namespace haze {

namespace {
constexpr char kMagic[4] = {'H', 'Z', 'C', 'K'};

void write_u32(std::ostream& os, uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
void write_u64(std::ostream& os, uint64_t v) { os.write(reinterpret_cast<const char*>(&v), 8); }

uint32_t read_u32(std::istream& is) {
    uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), 4);
    return v;
}

uint64_t read_u64(std::istream& is) {
    uint64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), 8);
    return v;
}
}  // namespace

const Tensor* Checkpoint::find(const std::string& name) const {
    for (const auto& [n, t] : tensors)
        if (n == name) return &t;
    return nullptr;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    nlohmann::json header;
    header["kind"] = ckpt.kind;
    header["config"] = ckpt.config;
    header["epoch"] = ckpt.epoch;
    header["step"] = ckpt.step;
    header["extra"] = ckpt.extra;
    nlohmann::json manifest = nlohmann::json::array();
    int64_t offset = 0;
    for (const auto& [name, t] : ckpt.tensors) {
        nlohmann::json entry;
        entry["name"] = name;
        entry["shape"] = t.shape();
        entry["offset"] = offset;
        manifest.push_back(entry);
        offset += t.numel();
    }
    header["tensors"] = manifest;
    const std::string hs = header.dump();

    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open checkpoint for writing: " + path);
    os.write(kMagic, 4);
    write_u32(os, Checkpoint::kFormatVersion);
    write_u64(os, hs.size());
    os.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    for (const auto& [name, t] : ckpt.tensors)
        os.write(reinterpret_cast<const char*>(t.data()),
                 static_cast<std::streamsize>(t.numel()) * 8);
    if (!os) throw IoError("failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open checkpoint: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw IoError("not a checkpoint file: " + path);
    const uint32_t version = read_u32(is);
    if (version != Checkpoint::kFormatVersion)
        throw IoError("checkpoint format version " + std::to_string(version) +
                      " unsupported (expected " + std::to_string(Checkpoint::kFormatVersion) +
                      "): " + path);
    const uint64_t hlen = read_u64(is);
    std::string hs(hlen, '\0');
    is.read(hs.data(), static_cast<std::streamsize>(hlen));
    if (!is) throw IoError("truncated checkpoint header: " + path);
    nlohmann::json header = nlohmann::json::parse(hs, nullptr, false);
    if (header.is_discarded()) throw IoError("corrupt checkpoint header: " + path);

    Checkpoint ckpt;
    ckpt.kind = header.value("kind", "");
    ckpt.config = header.value("config", nlohmann::json::object());
    ckpt.epoch = header.value("epoch", static_cast<int64_t>(0));
    ckpt.step = header.value("step", static_cast<int64_t>(0));
    ckpt.extra = header.value("extra", nlohmann::json::object());
    for (const auto& entry : header["tensors"]) {
        std::vector<int64_t> shape = entry["shape"].get<std::vector<int64_t>>();
        Tensor t{shape};
        is.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(t.numel()) * 8);
        if (!is) throw IoError("truncated checkpoint data: " + path);
        ckpt.tensors.emplace_back(entry["name"].get<std::string>(), std::move(t));
    }
    return ckpt;
}

}  // namespace haze
