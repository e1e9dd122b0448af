#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tnet/tensor.hpp"

// Dataset ingestion: binary graymap directories and a synthetic generator
// producing an 11-class sonar-like shape-classification task at 96x96.

namespace tnet {

struct LabeledImage {
    Tensor<float> pixels;  // (1,1,96,96), values in [0,1]
    int label = 0;
    std::string source_id;
};

struct DatasetSplit {
    std::vector<LabeledImage> train;
    std::vector<LabeledImage> test;
    std::vector<std::string> class_names;
};

// root contains one subdirectory per class of binary graymaps (P5, maxval
// <= 255, exactly 96x96). The manifest maps directory names to class
// indices, one "name,index" pair per line. All images load into the train
// list in lexicographic path order; splitting is the harness's concern.
DatasetSplit load_directory(const std::string& root, const std::string& manifest_path);

// One graymap by path; label is left at 0 and source_id is the path.
LabeledImage load_graymap(const std::string& path);

// Procedural bright shapes on a dark speckled background: class 0 is
// background speckle only; classes 1..10 are bar, disk, ring, cross,
// corner, two blobs, arc, wedge, stripes, and disk-in-ring, each with
// random rotation, translation and scale. Deterministic given the seed;
// stratified 80/20 train/test split per class.
DatasetSplit synth_generate(int n_per_class, std::uint64_t seed);

struct StatsReport {
    double mean = 0.0;
    double stddev = 0.0;
    long long pixel_count = 0;
};

// Pixel mean and standard deviation over train and test combined.
StatsReport normalize_stats(const DatasetSplit& split);

}  // namespace tnet
