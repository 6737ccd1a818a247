#pragma once

#include <cstdint>

#include <ATen/core/Generator.h>
#include <torch/torch.h>

namespace s2r {

// Deterministic CPU generator for a given seed.
at::Generator make_generator(std::uint64_t seed);

// Derive an independent sub-seed for a named subsystem and an optional counter.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream, std::uint64_t counter = 0);

// FNV-1a over the raw bytes of every parameter and buffer, in registration order.
std::uint64_t parameter_checksum(const torch::nn::Module& module);

// Total number of scalar parameters.
std::int64_t parameter_count(const torch::nn::Module& module);

// Throws NumericError naming `what` unless every element of `t` is finite.
void require_finite(const torch::Tensor& t, const std::string& what);

}  // namespace s2r
