#include "vecq/datasets.hpp"

#include "vecq/error.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

namespace vecq {

Dataset make_moons(std::size_t count, double noise, std::uint64_t seed) {
    if (count < 2) fail(ErrorCode::InvalidArgument, "moons needs at least two samples");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
    std::normal_distribution<double> jitter(0.0, noise);

    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    Dataset d;
    d.classes = 2;
    d.inputs = Matrix(count, 2);
    d.labels.resize(count);
    const std::size_t outer = count / 2;
    for (std::size_t i = 0; i < count; ++i) {
        const double t = angle(rng);
        double x, y;
        int label;
        if (i < outer) {
            x = std::cos(t);
            y = std::sin(t);
            label = 0;
        } else {
            x = 1.0 - std::cos(t);
            y = 0.5 - std::sin(t);
            label = 1;
        }
        const std::size_t row = order[i];
        d.inputs(row, 0) = x + (noise > 0.0 ? jitter(rng) : 0.0);
        d.inputs(row, 1) = y + (noise > 0.0 ? jitter(rng) : 0.0);
        d.labels[row] = label;
    }
    return d;
}

namespace {

std::vector<std::uint8_t> slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t offset,
                        const std::string& path) {
    if (offset + 4 > bytes.size()) fail(ErrorCode::CorruptDataset, path + ": truncated IDX header");
    return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
           (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

}  // namespace

Dataset load_mnist_idx(const std::string& images_path, const std::string& labels_path,
                       std::size_t max_count) {
    const auto images = slurp(images_path);
    const auto labels = slurp(labels_path);

    if (read_be32(images, 0, images_path) != 0x00000803u) {
        fail(ErrorCode::CorruptDataset, images_path + ": not an IDX image file");
    }
    if (read_be32(labels, 0, labels_path) != 0x00000801u) {
        fail(ErrorCode::CorruptDataset, labels_path + ": not an IDX label file");
    }
    const std::size_t n_images = read_be32(images, 4, images_path);
    const std::size_t rows = read_be32(images, 8, images_path);
    const std::size_t cols = read_be32(images, 12, images_path);
    const std::size_t n_labels = read_be32(labels, 4, labels_path);
    if (n_images != n_labels) fail(ErrorCode::CorruptDataset, "image and label counts differ");
    const std::size_t pixels = rows * cols;
    if (pixels == 0) fail(ErrorCode::CorruptDataset, images_path + ": empty images");
    if (images.size() < 16 + n_images * pixels) {
        fail(ErrorCode::CorruptDataset, images_path + ": truncated pixel data");
    }
    if (labels.size() < 8 + n_labels) fail(ErrorCode::CorruptDataset, labels_path + ": truncated labels");

    const std::size_t n = max_count == 0 ? n_images : std::min(max_count, n_images);
    Dataset d;
    d.inputs = Matrix(n, pixels);
    d.labels.resize(n);
    int max_label = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < pixels; ++p) {
            d.inputs(i, p) = images[16 + i * pixels + p] / 255.0;
        }
        d.labels[i] = labels[8 + i];
        max_label = std::max(max_label, d.labels[i]);
    }
    d.classes = std::max(10, max_label + 1);
    return d;
}

}  // namespace vecq
