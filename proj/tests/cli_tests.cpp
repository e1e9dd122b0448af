#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"

// End-to-end coverage of the command-line tool named by TNET_BIN. Each case
// runs the real binary through popen and checks exit status and output.

namespace {

namespace fs = std::filesystem;

struct Result {
    int status = -1;
    std::string out;  // stdout and stderr combined
};

Result run(const std::string& args) {
    const std::string cmd = std::string(TNET_BIN) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    Result r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
    const int rc = pclose(pipe);
    r.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    return r;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("cli-" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const char* name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("build prints the cost table with exact totals") {
    Result r = run("build --arch tinynet --filters 4 --n 5");
    CHECK(r.status == 0);
    CHECK(r.out.find("total") != std::string::npos);
    CHECK(r.out.find("1159") != std::string::npos);
    CHECK(r.out.find("1153478") != std::string::npos);

    r = run("build --arch smallfirenet --n 3");
    CHECK(r.status == 0);
    CHECK(r.out.find("3643") != std::string::npos);
    CHECK(r.out.find("+444") != std::string::npos);
    CHECK(r.out.find("unexplained normalization parameters") != std::string::npos);

    r = run("build --arch baseline-cnn");
    CHECK(r.status == 0);
    CHECK(r.out.find("930411") != std::string::npos);
}

TEST_CASE("build accepts a descriptor file") {
    TempDir t;
    std::ofstream(t.file("net.txt")) << "input c=1 h=32 w=32\n"
                                     << "tiny f=4\n"
                                     << "conv 1x1 f=5\n"
                                     << "gap\n"
                                     << "softmax\n";
    Result r = run("build --arch " + t.file("net.txt"));
    CHECK(r.status == 0);
    CHECK(r.out.find("net.txt") != std::string::npos);

    std::ofstream(t.file("bad.txt")) << "conv 9x9 f=4\n";
    r = run("build --arch " + t.file("bad.txt"));
    CHECK(r.status == 2);
    CHECK(r.out.find("line 1") != std::string::npos);
    CHECK(r.out.find("9x9") != std::string::npos);
}

TEST_CASE("impossible geometry exits with a usage error") {
    Result r = run("build --arch tinynet --filters 4 --n 9");
    CHECK(r.status == 2);
    CHECK(r.out.find("spatial extent exhausted") != std::string::npos);
}

TEST_CASE("unknown flags and architectures exit with a usage error") {
    CHECK(run("build --arch not-a-net").status == 2);
    CHECK(run("build --no-such-flag").status == 2);
    CHECK(run("").status == 2);
    CHECK(run("--help").status == 0);
    CHECK(run("build --help").status == 0);
}

TEST_CASE("train, predict, export and import-check round trip") {
    TempDir t;
    Result r = run("train --arch tinynet --filters 4 --n 2 --synthetic 8 --epochs 3 --lr 0.02 "
                   "--batch 16 --seed 9 --out " + t.file("m.tnet") +
                   " --metrics " + t.file("metrics.csv"));
    CHECK(r.status == 0);
    CHECK(r.out.find("model saved") != std::string::npos);
    CHECK(r.out.find("held-out accuracy") != std::string::npos);

    std::ifstream metrics(t.file("metrics.csv"));
    std::string header;
    std::getline(metrics, header);
    CHECK(header == "epoch,batch,loss,accuracy");
    int rows = 0;
    for (std::string line; std::getline(metrics, line);)
        if (!line.empty()) ++rows;
    // 8 per class keeps 7 for training: ceil(77/16) = 5 batches over 3 epochs
    CHECK(rows == 15);

    r = run("export --model " + t.file("m.tnet"));
    CHECK(r.status == 0);
    CHECK(r.out.find("tiny f=4") != std::string::npos);
    CHECK(r.out.find("softmax") != std::string::npos);

    r = run("import-check --model " + t.file("m.tnet"));
    CHECK(r.status == 0);
    CHECK(r.out.find("ok:") != std::string::npos);
    CHECK(r.out.find("571") != std::string::npos);

    // build a probe image: P5, 96x96, mid gray
    {
        std::ofstream os(t.file("probe.pgm"), std::ios::binary);
        os << "P5\n96 96\n255\n";
        for (int i = 0; i < 96 * 96; ++i) os.put(static_cast<char>(128));
    }
    r = run("predict --model " + t.file("m.tnet") + " --image " + t.file("probe.pgm"));
    CHECK(r.status == 0);
    // first line: class index; second line: 11 probabilities
    const int cls = std::stoi(r.out);
    CHECK(cls >= 0);
    CHECK(cls < 11);

    r = run("predict --model " + t.file("m.tnet") + " --image " + t.file("missing.pgm"));
    CHECK(r.status == 2);
}

TEST_CASE("import-check distinguishes the failure modes") {
    TempDir t;
    Result r = run("train --arch tinynet --filters 4 --n 1 --synthetic 2 --epochs 1 "
                   "--batch 8 --seed 1 --out " + t.file("m.tnet"));
    REQUIRE(r.status == 0);

    {
        std::ifstream is(t.file("m.tnet"), std::ios::binary);
        std::string bytes((std::istreambuf_iterator<char>(is)), {});
        std::ofstream(t.file("magic.tnet"), std::ios::binary) << "X" << bytes.substr(1);
        std::string ver = bytes;
        ver[4] = 9;
        std::ofstream(t.file("ver.tnet"), std::ios::binary) << ver;
        std::ofstream(t.file("cut.tnet"), std::ios::binary)
            << bytes.substr(0, bytes.size() / 2);
    }
    r = run("import-check --model " + t.file("magic.tnet"));
    CHECK(r.status == 2);
    CHECK(r.out.find("not a model file") != std::string::npos);

    r = run("import-check --model " + t.file("ver.tnet"));
    CHECK(r.status == 2);
    CHECK(r.out.find("unsupported model version") != std::string::npos);

    r = run("import-check --model " + t.file("cut.tnet"));
    CHECK(r.status == 2);
    CHECK(r.out.find("truncated") != std::string::npos);
}

TEST_CASE("eval reports per-fold and aggregate accuracy") {
    Result r = run("eval --arch tinynet --filters 4 --n 1 --synthetic 5 --epochs 2 --lr 0.02 "
                   "--batch 16 --seed 4 --k 3");
    CHECK(r.status == 0);
    CHECK(r.out.find("fold 0 accuracy") != std::string::npos);
    CHECK(r.out.find("fold 2 accuracy") != std::string::npos);
    CHECK(r.out.find("accuracy mean=") != std::string::npos);
    CHECK(r.out.find("std=") != std::string::npos);
}

TEST_CASE("gradcheck runs from the command line") {
    Result r = run("gradcheck --arch tinynet --filters 4 --n 1 --seed 2");
    CHECK(r.status == 0);
    CHECK(r.out.find("max_rel_error") != std::string::npos);
}

TEST_CASE("bench measures and bench --suite compares") {
    Result r = run("bench --arch tinynet --filters 4 --n 2 --runs 3 --warmup 1");
    CHECK(r.status == 0);
    CHECK(r.out.find("mean_ms") != std::string::npos);
    CHECK(r.out.find("tinynet-4-2") != std::string::npos);

    TempDir t;
    r = run("bench --suite --runs 2 --warmup 1 --csv " + t.file("suite.csv"));
    CHECK(r.status == 0);
    CHECK(r.out.find("baseline-cnn") != std::string::npos);
    CHECK(r.out.find("smallfirenet-3") != std::string::npos);
    CHECK(r.out.find("speedup") != std::string::npos);
    std::ifstream csv(t.file("suite.csv"));
    std::string header;
    std::getline(csv, header);
    CHECK(header == "name,params,flops,mean_ms,std_ms,speedup");
    int rows = 0;
    for (std::string line; std::getline(csv, line);)
        if (!line.empty()) ++rows;
    CHECK(rows == 4);
}

TEST_CASE("training divergence exits with its own status") {
    TempDir t;
    Result r = run("train --arch tinynet --filters 4 --n 1 --synthetic 3 --epochs 2 "
                   "--lr 1e37 --batch 8 --seed 1 --out " + t.file("d.tnet"));
    CHECK(r.status == 3);
    CHECK(r.out.find("diverged") != std::string::npos);
}
