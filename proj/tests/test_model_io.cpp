#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "tnet/architectures.hpp"
#include "tnet/model_io.hpp"
#include "tnet/rng.hpp"

using namespace tnet;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const char* stem) {
        path = (std::filesystem::temp_directory_path() /
                (std::string(stem) + "-" + std::to_string(::getpid()) + ".tnet"))
                   .string();
    }
    ~TempFile() { std::remove(path.c_str()); }
};

std::vector<char> slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is.good());
    return std::vector<char>(std::istreambuf_iterator<char>(is), {});
}

void spit(const std::string& path, const std::vector<char>& bytes) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("save and load reproduce inference bit for bit") {
    Network<float> model(lower(tinynet(4, 2, 11)));
    Rng rng(99);
    model.init_params(rng);

    Tensor<float> x(Shape{2, 1, 96, 96});
    for (auto& v : x.data) v = static_cast<float>(rng.uniform01());
    const Tensor<float> before = model.forward(x, Phase::infer);

    TempFile f("roundtrip");
    save_model(model, f.path);
    LoadedModel loaded = load_model(f.path);
    const Tensor<float>& after = loaded.model->forward(x, Phase::infer);

    REQUIRE(before.shape == after.shape);
    for (std::size_t i = 0; i < before.data.size(); ++i) CHECK(before.data[i] == after.data[i]);
}

TEST_CASE("saved parameters include the running statistics") {
    Network<float> model(lower(tinynet(4, 1, 11)));
    Rng rng(5);
    model.init_params(rng);
    // 1 tiny (conv w+b, conv w+b, norm gamma+beta+rmean+rvar) + head conv w+b
    CHECK(model.params().size() == 10);

    TempFile f("blobs");
    save_model(model, f.path);
    LoadedModel loaded = load_model(f.path);
    auto params = loaded.model->params();
    REQUIRE(params.size() == 10);
    auto original = model.params();
    for (std::size_t i = 0; i < params.size(); ++i) {
        CHECK(params[i].name == original[i].name);
        CHECK(params[i].value->data == original[i].value->data);
    }
}

TEST_CASE("a modified running statistic survives the round trip") {
    Network<float> model(lower(tinynet(4, 1, 11)));
    Rng rng(6);
    model.init_params(rng);
    for (auto& p : model.params())
        if (!p.trainable) p.value->fill(0.123f);

    TempFile f("stats");
    save_model(model, f.path);
    LoadedModel loaded = load_model(f.path);
    for (auto& p : loaded.model->params())
        if (!p.trainable)
            for (float v : p.value->data) CHECK(v == 0.123f);
}

TEST_CASE("corrupted files raise distinct errors") {
    Network<float> model(lower(tinynet(4, 1, 11)));
    Rng rng(7);
    model.init_params(rng);
    TempFile f("corrupt");
    save_model(model, f.path);
    const std::vector<char> good = slurp(f.path);

    SUBCASE("wrong magic") {
        std::vector<char> bad = good;
        bad[0] = 'X';
        spit(f.path, bad);
        try {
            load_model(f.path);
            FAIL("expected ModelFileError");
        } catch (const ModelFileError& e) {
            CHECK(e.kind == ModelFileError::Kind::bad_magic);
        }
    }

    SUBCASE("unsupported version") {
        std::vector<char> bad = good;
        bad[4] = 99;
        spit(f.path, bad);
        try {
            load_model(f.path);
            FAIL("expected ModelFileError");
        } catch (const ModelFileError& e) {
            CHECK(e.kind == ModelFileError::Kind::bad_version);
        }
    }

    SUBCASE("truncated mid-blob") {
        std::vector<char> bad(good.begin(), good.begin() + static_cast<long>(good.size() / 2));
        spit(f.path, bad);
        try {
            load_model(f.path);
            FAIL("expected ModelFileError");
        } catch (const ModelFileError& e) {
            CHECK(e.kind == ModelFileError::Kind::truncated);
        }
    }

    SUBCASE("trailing garbage") {
        std::vector<char> bad = good;
        bad.push_back('!');
        spit(f.path, bad);
        try {
            load_model(f.path);
            FAIL("expected ModelFileError");
        } catch (const ModelFileError& e) {
            CHECK(e.kind == ModelFileError::Kind::structure);
        }
    }

    SUBCASE("missing file") {
        try {
            load_model("/nonexistent/deeply/model.tnet");
            FAIL("expected ModelFileError");
        } catch (const ModelFileError& e) {
            CHECK(e.kind == ModelFileError::Kind::io);
        }
    }
}
