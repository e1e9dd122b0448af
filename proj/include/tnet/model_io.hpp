#pragma once

#include <memory>
#include <string>

#include "tnet/network.hpp"

// Binary model format, little-endian throughout:
//
//   bytes 0..3   magic "TNET"
//   u32          version (1)
//   u32          descriptor byte length, then that many UTF-8 bytes
//                (canonical descriptor text, see descriptor.hpp)
//   u32          blob count
//   per blob:    u32 name length + name bytes (e.g. "L3.conv.w"),
//                u32 rank (always 4), 4 x u32 extents (N,C,H,W),
//                then N*C*H*W IEEE-754 binary32 values, row-major
//
// Blobs appear in the executor's deterministic parameter order and include
// the normalization running statistics, so save -> load -> infer is
// bit-exact.

namespace tnet {

void save_model(Network<float>& model, const std::string& path);

struct LoadedModel {
    std::unique_ptr<Network<float>> model;
};

LoadedModel load_model(const std::string& path);

}  // namespace tnet
