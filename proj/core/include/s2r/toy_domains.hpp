#pragma once

#include <cstdint>

#include <torch/torch.h>

#include "s2r/dataset.hpp"
#include "s2r/palette.hpp"

namespace s2r {

// Procedural desk-scale stand-in for a game-engine/photograph domain pair.
//
// Both domains draw the same family of street scenes (sky, road, buildings,
// vegetation, cars, ...) as flat polygons. The synthetic domain renders the
// palette colors flat; the real domain adds shading and texture noise around
// the same class colors and uses a different scene prior (low horizon, more
// buildings and vegetation), so the class frequencies of the two domains
// differ.
struct ToyDomains {
    ClassPalette palette;
    DatasetHandle synthetic;     // paired: flat image + layout
    DatasetHandle real;          // unpaired: textured image only
    DatasetHandle real_labeled;  // same samples as `real`, labels kept (reference split for evaluation)
};

// Pure function of its arguments. Requires 2 <= num_classes <= 8, counts >= 1,
// and height/width divisible by 16.
ToyDomains make_toy_domains(std::uint64_t seed, std::int64_t n_synthetic, std::int64_t n_real, int num_classes,
                            ImageSize size);

// Normalized class-frequency histogram (length C) over every label of a labeled dataset.
torch::Tensor class_histogram(const DatasetHandle& labeled, int num_classes);

// Total-variation distance between two normalized histograms.
double total_variation(const torch::Tensor& p, const torch::Tensor& q);

// Flat palette rendering of an id map (3×H×W in [-1,1]).
torch::Tensor render_flat(const torch::Tensor& ids, const ClassPalette& palette);

}  // namespace s2r
