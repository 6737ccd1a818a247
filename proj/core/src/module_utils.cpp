#include "s2r/module_utils.hpp"

#include <ATen/CPUGeneratorImpl.h>

#include "s2r/errors.hpp"

namespace s2r {

at::Generator make_generator(std::uint64_t seed) {
    return at::make_generator<at::CPUGeneratorImpl>(seed);
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream, std::uint64_t counter) {
    // splitmix64 over the combined key
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    };
    return mix(mix(mix(root) ^ stream) ^ counter);
}

namespace {

void fnv_bytes(std::uint64_t& h, const torch::Tensor& t) {
    const auto c = t.detach().contiguous();
    const auto* p = static_cast<const unsigned char*>(c.data_ptr());
    const auto n = static_cast<std::size_t>(c.numel()) * c.element_size();
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
}

}  // namespace

std::uint64_t parameter_checksum(const torch::nn::Module& module) {
    std::uint64_t h = 1469598103934665603ull;
    for (const auto& p : module.parameters()) fnv_bytes(h, p);
    for (const auto& b : module.buffers()) fnv_bytes(h, b);
    return h;
}

std::int64_t parameter_count(const torch::nn::Module& module) {
    std::int64_t n = 0;
    for (const auto& p : module.parameters()) n += p.numel();
    return n;
}

void require_finite(const torch::Tensor& t, const std::string& what) {
    if (!torch::isfinite(t.detach()).all().item<bool>()) throw NumericError(what + " contains NaN or Inf");
}

}  // namespace s2r
