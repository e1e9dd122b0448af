#include <string>
#include <vector>

#include "doctest.h"
#include "tnet/architectures.hpp"
#include "tnet/lowering.hpp"

using namespace tnet;

namespace {

std::vector<Op> ops_of(const LoweredNet& net) {
    std::vector<Op> out;
    for (const NodeDesc& nd : net.nodes) out.push_back(nd.op);
    return out;
}

NetworkDef small(std::vector<Layer> layers, int h = 8, int w = 8, int c = 1) {
    NetworkDef def;
    def.name = "t";
    def.in_ch = c;
    def.in_h = h;
    def.in_w = w;
    def.classes = 3;
    def.layers = std::move(layers);
    return def;
}

}  // namespace

TEST_CASE("validate enforces the closing stages") {
    CHECK_THROWS_AS(validate(small({})), BuildError);
    // softmax missing
    CHECK_THROWS_AS(validate(small({ConvLayer{1, 1, 3, Pad::same}, GapLayer{}})), BuildError);
    // softmax not last
    CHECK_THROWS_AS(validate(small({GapLayer{}, SoftmaxLayer{}, GapLayer{}})), BuildError);
    // softmax twice
    CHECK_THROWS_AS(
        validate(small({GapLayer{}, SoftmaxLayer{}, GapLayer{}, SoftmaxLayer{}})), BuildError);
    // preceded by neither pooling-to-vector nor dense
    CHECK_THROWS_AS(validate(small({ConvLayer{1, 1, 3, Pad::same}, SoftmaxLayer{}})), BuildError);
    CHECK_NOTHROW(validate(small({ConvLayer{1, 1, 3, Pad::same}, GapLayer{}, SoftmaxLayer{}})));
    CHECK_NOTHROW(validate(small({FlattenLayer{}, DenseLayer{3}, SoftmaxLayer{}})));
}

TEST_CASE("validate rejects bad layer parameters") {
    CHECK_THROWS_AS(validate(small({ConvLayer{2, 2, 3, Pad::same}, GapLayer{}, SoftmaxLayer{}})),
                    BuildError);
    CHECK_THROWS_AS(validate(small({ConvLayer{3, 3, 0, Pad::same}, GapLayer{}, SoftmaxLayer{}})),
                    BuildError);
    CHECK_THROWS_AS(validate(small({TinyLayer{0}, GapLayer{}, SoftmaxLayer{}})), BuildError);
    CHECK_THROWS_AS(validate(small({FireLayer{0, 4, 4}, GapLayer{}, SoftmaxLayer{}})), BuildError);
    CHECK_THROWS_AS(validate(small({FlattenLayer{}, DenseLayer{0}, SoftmaxLayer{}})), BuildError);
    NetworkDef bad = small({GapLayer{}, SoftmaxLayer{}});
    bad.in_h = 0;
    CHECK_THROWS_AS(validate(bad), BuildError);
}

TEST_CASE("tiny block lowers to conv-relu-conv-norm-relu-pool") {
    LoweredNet net = lower(small({TinyLayer{4}, ConvLayer{1, 1, 3, Pad::same}, GapLayer{},
                                  SoftmaxLayer{}}));
    CHECK(ops_of(net) == std::vector<Op>{Op::input, Op::conv, Op::relu, Op::conv, Op::bn,
                                         Op::relu, Op::maxpool, Op::conv, Op::gap, Op::softmax});
    // 3x3 then 1x1, both same-padded
    CHECK(net.nodes[1].kh == 3);
    CHECK(net.nodes[3].kh == 1);
    // width-axis normalization length is the activation width before pooling
    CHECK(net.nodes[4].bn_len == 8);
    // the class-score conv gets no rectifier: gap follows directly
    CHECK(net.nodes[7].out_ch == 3);
    CHECK(net.nodes[8].op == Op::gap);
    CHECK(net.logits_node == 8);
    CHECK(net.output_node == 9);
}

TEST_CASE("fire block lowers to squeeze-expand-merge with one rectifier after the merge") {
    LoweredNet net =
        lower(small({FireLayer{4, 4, 4}, GapLayer{}, SoftmaxLayer{}}));
    CHECK(ops_of(net) == std::vector<Op>{Op::input, Op::conv, Op::relu, Op::conv, Op::conv,
                                         Op::concat, Op::relu, Op::gap, Op::softmax});
    // both expands read the rectified squeeze
    CHECK(net.nodes[3].inputs == std::vector<int>{2});
    CHECK(net.nodes[4].inputs == std::vector<int>{2});
    CHECK(net.nodes[5].inputs == std::vector<int>{3, 4});
    CHECK(net.nodes[5].split == 4);
    CHECK(net.nodes[5].c == 8);
    CHECK(net.nodes[3].kh == 1);
    CHECK(net.nodes[4].kh == 3);
}

TEST_CASE("smallfire block is two fire blocks and a pool") {
    LoweredNet net = lower(small({SmallFireLayer{4, 4, 4}, GapLayer{}, SoftmaxLayer{}}));
    CHECK(ops_of(net) ==
          std::vector<Op>{Op::input, Op::conv, Op::relu, Op::conv, Op::conv, Op::concat, Op::relu,
                          Op::conv, Op::relu, Op::conv, Op::conv, Op::concat, Op::relu,
                          Op::maxpool, Op::gap, Op::softmax});
    CHECK(net.nodes[13].h == 4);
}

TEST_CASE("dense head keeps its rectifier except before softmax") {
    LoweredNet net = lower(
        small({FlattenLayer{}, DenseLayer{6}, DenseLayer{3}, SoftmaxLayer{}}, 4, 4, 2));
    CHECK(ops_of(net) == std::vector<Op>{Op::input, Op::flatten, Op::dense, Op::relu, Op::dense,
                                         Op::softmax});
    CHECK(net.nodes[1].c == 32);
    CHECK(net.nodes[2].in_features == 32);
    CHECK(net.nodes[2].out_features == 6);
    CHECK(net.nodes[4].out_features == 3);
}

TEST_CASE("shape inference tracks valid padding and pooling") {
    LoweredNet net = lower(small({ConvLayer{5, 5, 2, Pad::valid}, MaxPoolLayer{},
                                  ConvLayer{3, 3, 2, Pad::same}, GapLayer{}, SoftmaxLayer{}},
                                 20, 16));
    // 20x16 -> valid 5x5 -> 16x12 -> pool -> 8x6
    CHECK(net.nodes[1].h == 16);
    CHECK(net.nodes[1].w == 12);
    CHECK(net.nodes[3].h == 8);
    CHECK(net.nodes[3].w == 6);
}

TEST_CASE("pooling below a 2x2 extent is rejected") {
    CHECK_THROWS_WITH_AS(
        lower(small({MaxPoolLayer{}, MaxPoolLayer{}, MaxPoolLayer{}, MaxPoolLayer{}, GapLayer{},
                     SoftmaxLayer{}},
                    8, 8)),
        doctest::Contains("spatial extent exhausted"), BuildError);
    // 8 -> 4 -> 2 -> 1 is fine; one more is not
    CHECK_NOTHROW(lower(small({MaxPoolLayer{}, MaxPoolLayer{}, MaxPoolLayer{}, GapLayer{},
                               SoftmaxLayer{}},
                              8, 8)));
}

TEST_CASE("builder module counts respect the input extent") {
    CHECK_NOTHROW(lower(tinynet(4, 5, 11)));
    CHECK_THROWS_WITH_AS(tinynet(4, 6, 11), doctest::Contains("spatial extent exhausted"),
                         BuildError);
    CHECK_THROWS_WITH_AS(tinynet(4, 9, 11), doctest::Contains("spatial extent exhausted"),
                         BuildError);
    CHECK_THROWS_WITH_AS(smallfirenet(6, 11), doctest::Contains("spatial extent exhausted"),
                         BuildError);
    CHECK_THROWS_AS(tinynet(0, 1, 11), BuildError);
    CHECK_THROWS_AS(tinynet(4, 0, 11), BuildError);
    CHECK_THROWS_AS(tinynet(4, 1, 0), BuildError);
}

TEST_CASE("node names carry the node id and op") {
    LoweredNet net = lower(small({TinyLayer{2}, GapLayer{}, SoftmaxLayer{}}));
    CHECK(net.nodes[0].name == "L0.input");
    CHECK(net.nodes[1].name == "L1.conv");
    CHECK(net.nodes[4].name == "L4.bn");
    CHECK(std::string(op_name(Op::maxpool)) == "maxpool");
}
