#include <gtest/gtest.h>

#include "s2r/backbone.hpp"
#include "s2r/errors.hpp"
#include "s2r/module_utils.hpp"
#include "s2r/patch_ops.hpp"
#include "support.hpp"

using namespace s2r;

TEST(Backbone, Vgg16ShapeTrace) {
    FeatureBackbone bb{BackboneConfig{}};
    torch::NoGradGuard guard;
    const auto x = torch::zeros({8, 3, 128, 256}).uniform_(-1, 1);
    const auto pyr = bb->extract(x);
    ASSERT_EQ(pyr.size(), 3u);
    EXPECT_EQ(pyr.layer_ids, (std::vector<std::string>{"relu3_3", "relu4_3", "relu5_3"}));
    EXPECT_EQ(pyr.at("relu3_3").sizes(), (std::vector<std::int64_t>{8, 256, 32, 64}));
    EXPECT_EQ(pyr.at("relu4_3").sizes(), (std::vector<std::int64_t>{8, 512, 16, 32}));
    EXPECT_EQ(pyr.at("relu5_3").sizes(), (std::vector<std::int64_t>{8, 512, 8, 16}));
    EXPECT_EQ(pyr.source_batch, 8);
    EXPECT_EQ(bb->layer_channels(), (std::vector<std::int64_t>{256, 512, 512}));
    EXPECT_EQ(bb->min_input_size(), 16);
}

TEST(Backbone, DeterministicAndFrozen) {
    FeatureBackbone bb{BackboneConfig{}};
    const auto before = parameter_checksum(*bb);
    auto x = torch::zeros({2, 3, 32, 64}).uniform_(-1, 1).requires_grad_();
    const auto a = bb->extract(x);
    const auto b = bb->extract(x);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(torch::equal(a[i], b[i]));
    for (const auto& p : bb->parameters()) EXPECT_FALSE(p.requires_grad());

    // Gradients reach the input, never the weights.
    (a[0].sum() + a[2].sum()).backward();
    ASSERT_TRUE(x.grad().defined());
    EXPECT_GT(x.grad().abs().sum().item<float>(), 0.0f);
    for (const auto& p : bb->parameters()) EXPECT_FALSE(p.grad().defined());
    EXPECT_EQ(parameter_checksum(*bb), before);
}

TEST(Backbone, RandomFixedIsReproducible) {
    FeatureBackbone a{BackboneConfig{}};
    FeatureBackbone b{BackboneConfig{}};
    EXPECT_EQ(parameter_checksum(*a), parameter_checksum(*b));
    // Frozen from a reference process; guards cross-process reproducibility.
    EXPECT_EQ(parameter_checksum(*a), 8992771630851235230ull);
    BackboneConfig other;
    other.seed = 1;
    FeatureBackbone c{other};
    EXPECT_NE(parameter_checksum(*a), parameter_checksum(*c));
}

TEST(Backbone, PhiMatchesExtractOfPatches) {
    FeatureBackbone bb{fixtures::tiny_backbone_config()};
    torch::NoGradGuard guard;
    fixtures::Rand rnd(4);
    const auto x = rnd.normal({2, 3, 16, 32}).clamp(-1, 1);
    const auto p1 = bb->phi(x, 1), e = bb->extract(x);
    for (std::size_t i = 0; i < e.size(); ++i) EXPECT_TRUE(torch::equal(p1[i], e[i]));
    for (int k : {2, 4}) {
        const auto pk = bb->phi(x, k);
        const auto ref = bb->extract(patchify(x, k).data);
        for (std::size_t i = 0; i < pk.size(); ++i) {
            EXPECT_EQ(pk[i].size(0), 2 * k * k);
            EXPECT_TRUE(torch::equal(pk[i], ref[i]));
        }
    }
}

TEST(Backbone, PhiBatchAxisAtPaperResolution) {
    FeatureBackbone bb{fixtures::tiny_backbone_config()};
    torch::NoGradGuard guard;
    const auto pyr = bb->phi(torch::zeros({2, 3, 256, 512}), 2);
    for (std::size_t i = 0; i < pyr.size(); ++i) EXPECT_EQ(pyr[i].size(0), 8);
}

TEST(Backbone, ConstantImagePatchesAgree) {
    FeatureBackbone bb{BackboneConfig{}};
    torch::NoGradGuard guard;
    const auto pyr = bb->phi(torch::full({1, 3, 64, 128}, 0.3f), 2);
    for (std::size_t l = 0; l < pyr.size(); ++l)
        for (int p = 1; p < 4; ++p) EXPECT_TRUE(torch::equal(pyr[l][p], pyr[l][0])) << pyr.layer_ids[l];
}

TEST(Backbone, SpatialSizesNonIncreasing) {
    FeatureBackbone bb{BackboneConfig{}};
    torch::NoGradGuard guard;
    const auto pyr = bb->extract(torch::zeros({1, 3, 64, 64}));
    for (std::size_t i = 1; i < pyr.size(); ++i) {
        EXPECT_LE(pyr[i].size(2), pyr[i - 1].size(2));
        EXPECT_LE(pyr[i].size(3), pyr[i - 1].size(3));
    }
}

TEST(Backbone, Errors) {
    FeatureBackbone bb{BackboneConfig{}};
    EXPECT_THROW(bb->extract(torch::zeros({1, 3, 8, 64})), ArgumentError);
    EXPECT_THROW(bb->extract(torch::zeros({1, 1, 32, 32})), ShapeError);
    EXPECT_THROW(bb->phi(torch::zeros({1, 3, 30, 64}), 4), ArgumentError);

    BackboneConfig bad;
    bad.layer_ids = {"relu9_9"};
    EXPECT_THROW(FeatureBackbone{bad}, ConfigError);
    bad.layer_ids = {"relu4_3", "relu3_3"};
    EXPECT_THROW(FeatureBackbone{bad}, ConfigError);
    BackboneConfig pretrained;
    pretrained.weights_source = WeightsSource::PretrainedFile;
    EXPECT_THROW(FeatureBackbone{pretrained}, ConfigError);
    pretrained.weights_path = "/nonexistent/vgg16.pt";
    EXPECT_THROW(FeatureBackbone{pretrained}, Error);
}

TEST(Backbone, PhiGradientMatchesFiniteDifferences) {
    FeatureBackbone bb{fixtures::tiny_backbone_config(3)};
    bb->to(torch::kFloat64);
    fixtures::Rand rnd(12);
    const auto x0 = rnd.normal({1, 3, 8, 8}, torch::kFloat64).clamp(-0.9, 0.9);
    const auto pyr0 = bb->phi(x0, 2);
    std::vector<torch::Tensor> weights;
    for (std::size_t i = 0; i < pyr0.size(); ++i) weights.push_back(rnd.normal(pyr0[i].sizes(), torch::kFloat64));
    auto f = [&](const torch::Tensor& x) {
        const auto pyr = bb->phi(x, 2);
        auto s = torch::zeros({}, torch::kFloat64);
        for (std::size_t i = 0; i < pyr.size(); ++i) s = s + (pyr[i] * weights[i]).sum();
        return s;
    };
    auto x = x0.clone().requires_grad_();
    f(x).backward();
    const auto numeric = fixtures::numeric_gradient([&](const torch::Tensor& v) { return f(v).item<double>(); }, x0);
    EXPECT_LT(fixtures::relative_error(x.grad(), numeric), 1e-2);
}
