#include "tnet/model_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>

#include "tnet/descriptor.hpp"

namespace tnet {

static_assert(std::numeric_limits<float>::is_iec559, "binary32 storage requires IEEE-754 floats");

namespace {

constexpr char kMagic[4] = {'T', 'N', 'E', 'T'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
    const char bytes[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                           static_cast<char>((v >> 16) & 0xff),
                           static_cast<char>((v >> 24) & 0xff)};
    os.write(bytes, 4);
}

void put_f32(std::ostream& os, float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put_u32(os, bits);
}

bool get_u32(std::istream& is, std::uint32_t& v) {
    unsigned char bytes[4];
    if (!is.read(reinterpret_cast<char*>(bytes), 4)) return false;
    v = static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
        (static_cast<std::uint32_t>(bytes[2]) << 16) |
        (static_cast<std::uint32_t>(bytes[3]) << 24);
    return true;
}

bool get_f32(std::istream& is, float& f) {
    std::uint32_t bits;
    if (!get_u32(is, bits)) return false;
    std::memcpy(&f, &bits, 4);
    return true;
}

[[noreturn]] void truncated(const std::string& what) {
    throw ModelFileError(ModelFileError::Kind::truncated,
                         "truncated model file while reading " + what);
}

}  // namespace

void save_model(Network<float>& model, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw ModelFileError(ModelFileError::Kind::io, "cannot open " + path + " for writing");
    os.write(kMagic, 4);
    put_u32(os, kVersion);
    const std::string descriptor = write_descriptor(model.lowered().def);
    put_u32(os, static_cast<std::uint32_t>(descriptor.size()));
    os.write(descriptor.data(), static_cast<std::streamsize>(descriptor.size()));

    auto params = model.params();
    put_u32(os, static_cast<std::uint32_t>(params.size()));
    for (const auto& p : params) {
        put_u32(os, static_cast<std::uint32_t>(p.name.size()));
        os.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
        put_u32(os, 4);
        const Shape s = p.value->shape;
        put_u32(os, static_cast<std::uint32_t>(s.n));
        put_u32(os, static_cast<std::uint32_t>(s.c));
        put_u32(os, static_cast<std::uint32_t>(s.h));
        put_u32(os, static_cast<std::uint32_t>(s.w));
        for (float v : p.value->data) put_f32(os, v);
    }
    if (!os) throw ModelFileError(ModelFileError::Kind::io, "write failed for " + path);
}

LoadedModel load_model(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ModelFileError(ModelFileError::Kind::io, "cannot open " + path);

    char magic[4];
    if (!is.read(magic, 4)) truncated("magic");
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw ModelFileError(ModelFileError::Kind::bad_magic, path + " is not a model file");
    std::uint32_t version;
    if (!get_u32(is, version)) truncated("version");
    if (version != kVersion)
        throw ModelFileError(ModelFileError::Kind::bad_version,
                             "unsupported model version " + std::to_string(version));

    std::uint32_t desc_len;
    if (!get_u32(is, desc_len)) truncated("descriptor length");
    std::string descriptor(desc_len, '\0');
    if (!is.read(descriptor.data(), desc_len)) truncated("descriptor");

    NetworkDef def;
    try {
        def = parse_descriptor(descriptor);
        validate(def);
    } catch (const BuildError& e) {
        throw ModelFileError(ModelFileError::Kind::structure,
                             std::string("embedded descriptor is invalid: ") + e.what());
    }

    LoadedModel loaded;
    loaded.model = std::make_unique<Network<float>>(lower(def));
    auto params = loaded.model->params();

    std::uint32_t blob_count;
    if (!get_u32(is, blob_count)) truncated("blob count");
    if (blob_count != params.size())
        throw ModelFileError(ModelFileError::Kind::structure,
                             "file has " + std::to_string(blob_count) + " parameter blobs, "
                             "architecture needs " + std::to_string(params.size()));

    for (auto& p : params) {
        std::uint32_t name_len;
        if (!get_u32(is, name_len)) truncated(p.name);
        std::string name(name_len, '\0');
        if (!is.read(name.data(), name_len)) truncated(p.name);
        if (name != p.name)
            throw ModelFileError(ModelFileError::Kind::structure,
                                 "parameter order mismatch: file has '" + name + "', expected '" +
                                     p.name + "'");
        std::uint32_t rank;
        if (!get_u32(is, rank)) truncated(name);
        if (rank != 4)
            throw ModelFileError(ModelFileError::Kind::structure,
                                 "parameter '" + name + "' has rank " + std::to_string(rank) +
                                     ", expected 4");
        std::uint32_t ext[4];
        for (auto& e : ext)
            if (!get_u32(is, e)) truncated(name);
        const Shape s = p.value->shape;
        if (ext[0] != static_cast<std::uint32_t>(s.n) ||
            ext[1] != static_cast<std::uint32_t>(s.c) ||
            ext[2] != static_cast<std::uint32_t>(s.h) ||
            ext[3] != static_cast<std::uint32_t>(s.w))
            throw ModelFileError(ModelFileError::Kind::structure,
                                 "parameter '" + name + "' extents do not match the architecture");
        for (auto& v : p.value->data)
            if (!get_f32(is, v)) truncated(name);
    }
    if (is.peek() != std::char_traits<char>::eof())
        throw ModelFileError(ModelFileError::Kind::structure,
                             "unexpected bytes after the last parameter blob");
    return loaded;
}

}  // namespace tnet
