#pragma once

#include "vecq/train.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace vecq {

struct Dataset {
    Matrix inputs;
    std::vector<int> labels;
    int classes = 0;

    std::size_t size() const noexcept { return labels.size(); }
};

// Two interleaved half circles with Gaussian jitter, labels 0/1.
Dataset make_moons(std::size_t count, double noise, std::uint64_t seed);

// Big-endian IDX files: 0x00000803 images (n, rows, cols) and 0x00000801
// labels (n). Pixels are scaled into [0, 1]. max_count = 0 reads everything.
Dataset load_mnist_idx(const std::string& images_path, const std::string& labels_path,
                       std::size_t max_count = 0);

}  // namespace vecq
