#pragma once

#include <string>

#include "tnet/netdef.hpp"

// Text form of a NetworkDef, one layer per line. Grammar:
//
//   input c=<n> h=<n> w=<n>        optional, defaults to c=1 h=96 w=96
//   bnmode width|channel           optional, defaults to width
//   conv <K>x<K> f=<n> [pad=same|valid]    K in {1,3,5}; pad defaults to same
//   tiny f=<n>
//   fire s=<n> e1=<n> e3=<n>
//   smallfire s=<n> e1=<n> e3=<n>
//   maxpool 2x2
//   gap
//   flatten
//   dense f=<n>
//   softmax
//
// Blank lines and text after '#' are ignored. Parse errors carry the
// 1-based line number. The writer emits a canonical form (input and bnmode
// lines always present) that re-parses to an equal definition.

namespace tnet {

NetworkDef parse_descriptor(const std::string& text);

std::string write_descriptor(const NetworkDef& def);

bool layers_equal(const NetworkDef& a, const NetworkDef& b);

}  // namespace tnet
