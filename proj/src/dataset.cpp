#include "tnet/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tnet/errors.hpp"
#include "tnet/rng.hpp"

namespace fs = std::filesystem;

namespace tnet {

namespace {

constexpr int kSide = 96;

// P5 header: token-based, '#' comments allowed anywhere in the header.
int next_header_int(std::istream& is, const std::string& path) {
    for (;;) {
        int ch = is.peek();
        if (ch == EOF) throw DataError(path + ": truncated graymap header");
        if (std::isspace(ch)) {
            is.get();
        } else if (ch == '#') {
            std::string skip;
            std::getline(is, skip);
        } else {
            break;
        }
    }
    int value;
    if (!(is >> value)) throw DataError(path + ": malformed graymap header");
    return value;
}

LabeledImage load_pgm(const std::string& path, int label, std::string source_id) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open " + path);
    char p, five;
    is.get(p);
    is.get(five);
    if (p != 'P' || five != '5')
        throw DataError(path + ": not a binary graymap (expected P5)");
    const int w = next_header_int(is, path);
    const int h = next_header_int(is, path);
    const int maxval = next_header_int(is, path);
    if (w != kSide || h != kSide)
        throw DataError(path + ": image is " + std::to_string(w) + "x" + std::to_string(h) +
                        ", expected 96x96");
    if (maxval < 1 || maxval > 255)
        throw DataError(path + ": unsupported maxval " + std::to_string(maxval));
    is.get();  // single whitespace byte after maxval

    LabeledImage img;
    img.pixels.resize(Shape{1, 1, kSide, kSide});
    img.label = label;
    img.source_id = std::move(source_id);
    std::vector<unsigned char> bytes(static_cast<std::size_t>(kSide) * kSide);
    if (!is.read(reinterpret_cast<char*>(bytes.data()),
                 static_cast<std::streamsize>(bytes.size())))
        throw DataError(path + ": truncated pixel data");
    for (std::size_t i = 0; i < bytes.size(); ++i)
        img.pixels.data[i] = static_cast<float>(bytes[i]) / static_cast<float>(maxval);
    return img;
}

}  // namespace

LabeledImage load_graymap(const std::string& path) { return load_pgm(path, 0, path); }

DatasetSplit load_directory(const std::string& root, const std::string& manifest_path) {
    std::ifstream mf(manifest_path);
    if (!mf) throw DataError("cannot open manifest " + manifest_path);

    std::vector<std::pair<std::string, int>> classes;
    std::string line;
    int line_no = 0;
    int max_index = -1;
    while (std::getline(mf, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw DataError(manifest_path + ":" + std::to_string(line_no) +
                            ": expected name,index");
        const std::string name = line.substr(0, comma);
        int index;
        try {
            index = std::stoi(line.substr(comma + 1));
        } catch (const std::exception&) {
            throw DataError(manifest_path + ":" + std::to_string(line_no) + ": bad index");
        }
        if (index < 0)
            throw DataError(manifest_path + ":" + std::to_string(line_no) + ": bad index");
        classes.emplace_back(name, index);
        max_index = std::max(max_index, index);
    }
    if (classes.empty()) throw DataError(manifest_path + " lists no classes");

    DatasetSplit split;
    split.class_names.assign(static_cast<std::size_t>(max_index) + 1, "");
    for (const auto& [name, index] : classes)
        split.class_names[static_cast<std::size_t>(index)] = name;

    std::sort(classes.begin(), classes.end());
    for (const auto& [name, index] : classes) {
        const fs::path dir = fs::path(root) / name;
        if (!fs::is_directory(dir))
            throw DataError("class directory missing: " + dir.string());
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir))
            if (entry.is_regular_file()) files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files)
            split.train.push_back(load_pgm(f.string(), index, name + "/" + f.filename().string()));
    }
    return split;
}

namespace {

struct Pose {
    double cx, cy;    // object center in image coordinates
    double cosr, sinr;
    double scale;
};

// Membership test for class k at object-frame point (ux, uy).
bool inside_shape(int k, double ux, double uy) {
    const double r = std::sqrt(ux * ux + uy * uy);
    switch (k) {
        case 1:  // bar
            return std::abs(ux) < 28 && std::abs(uy) < 7;
        case 2:  // disk
            return r < 18;
        case 3:  // ring
            return r > 13 && r < 21;
        case 4:  // cross
            return (std::abs(ux) < 24 && std::abs(uy) < 6) ||
                   (std::abs(uy) < 24 && std::abs(ux) < 6);
        case 5:  // corner
            return (ux > -24 && ux < 24 && uy > 12 && uy < 24) ||
                   (ux > -24 && ux < -12 && uy > -24 && uy < 24);
        case 6:  // two blobs
            return std::hypot(ux - 16, uy) < 11 || std::hypot(ux + 16, uy) < 11;
        case 7:  // arc
            return r > 13 && r < 21 && ux > 2;
        case 8:  // wedge
            return ux > -20 && ux < 20 && std::abs(uy) < (ux + 20) / 2.2;
        case 9:  // stripes
            return std::abs(ux) < 26 && std::abs(uy) < 26 &&
                   (static_cast<int>(std::floor((uy + 96) / 8.0)) & 1) == 0;
        case 10:  // disk in ring
            return r < 9 || (r > 15 && r < 21);
        default:
            return false;
    }
}

}  // namespace

DatasetSplit synth_generate(int n_per_class, std::uint64_t seed) {
    if (n_per_class < 1) throw DataError("n_per_class must be at least 1");
    constexpr int kClasses = 11;
    static const char* kNames[kClasses] = {"background", "bar",  "disk",  "ring",
                                           "cross",      "corner", "twoblob", "arc",
                                           "wedge",      "stripes", "diskring"};
    DatasetSplit split;
    for (const char* n : kNames) split.class_names.emplace_back(n);

    Rng rng(seed);
    const int n_train = n_per_class - n_per_class / 5;
    for (int k = 0; k < kClasses; ++k) {
        for (int i = 0; i < n_per_class; ++i) {
            Pose pose;
            pose.cx = 36.0 + 24.0 * rng.uniform01();
            pose.cy = 36.0 + 24.0 * rng.uniform01();
            const double angle = rng.uniform(0.0, 6.283185307179586);
            pose.cosr = std::cos(angle);
            pose.sinr = std::sin(angle);
            pose.scale = rng.uniform(0.85, 1.2);

            LabeledImage img;
            img.pixels.resize(Shape{1, 1, kSide, kSide});
            img.label = k;
            img.source_id = std::string(kNames[k]) + "/" + std::to_string(i);
            for (int y = 0; y < kSide; ++y) {
                for (int x = 0; x < kSide; ++x) {
                    const double dx = (x - pose.cx) / pose.scale;
                    const double dy = (y - pose.cy) / pose.scale;
                    const double ux = pose.cosr * dx + pose.sinr * dy;
                    const double uy = -pose.sinr * dx + pose.cosr * dy;
                    double p = inside_shape(k, ux, uy) ? 0.85 : 0.08;
                    const double u = rng.uniform(-1.0, 1.0);
                    p *= 1.0 + 0.4 * u;
                    img.pixels.data[static_cast<std::size_t>(y) * kSide + x] =
                        static_cast<float>(p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p));
                }
            }
            (i < n_train ? split.train : split.test).push_back(std::move(img));
        }
    }
    return split;
}

StatsReport normalize_stats(const DatasetSplit& split) {
    StatsReport rep;
    double sum = 0.0, sumsq = 0.0;
    for (const auto* list : {&split.train, &split.test}) {
        for (const LabeledImage& img : *list) {
            for (float v : img.pixels.data) {
                sum += v;
                sumsq += static_cast<double>(v) * v;
            }
            rep.pixel_count += img.pixels.size();
        }
    }
    if (rep.pixel_count == 0) throw DataError("dataset is empty");
    rep.mean = sum / static_cast<double>(rep.pixel_count);
    const double var = sumsq / static_cast<double>(rep.pixel_count) - rep.mean * rep.mean;
    rep.stddev = std::sqrt(var > 0.0 ? var : 0.0);
    return rep;
}

}  // namespace tnet
