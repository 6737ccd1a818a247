#include <gtest/gtest.h>

#include "s2r/errors.hpp"
#include "s2r/wavelet.hpp"
#include "support.hpp"

using namespace s2r;

TEST(Dwt2, TwoByTwoBlock) {
    const auto x = torch::tensor({1.0, 2.0, 3.0, 4.0}, torch::kFloat64).view({1, 1, 2, 2});
    const auto c = dwt2(x);
    ASSERT_EQ(c.sizes(), (std::vector<std::int64_t>{1, 4, 1, 1}));
    EXPECT_DOUBLE_EQ(c[0][0][0][0].item<double>(), 5.0);   // LL
    EXPECT_DOUBLE_EQ(c[0][1][0][0].item<double>(), -1.0);  // LH
    EXPECT_DOUBLE_EQ(c[0][2][0][0].item<double>(), -2.0);  // HL
    EXPECT_DOUBLE_EQ(c[0][3][0][0].item<double>(), 0.0);   // HH
}

TEST(Dwt2, ConstantImageClosedForm) {
    for (double v : {-1.0, 0.25, 0.7}) {
        const auto c = dwt2(torch::full({2, 3, 8, 16}, v, torch::kFloat64));
        EXPECT_TRUE(torch::equal(c.slice(1, 0, 3), torch::full({2, 3, 4, 8}, 2 * v, torch::kFloat64)));
        EXPECT_TRUE(torch::equal(c.slice(1, 3, 12), torch::zeros({2, 9, 4, 8}, torch::kFloat64)));
    }
}

TEST(Dwt2, BandOrderPerChannel) {
    // Channel blocks are [LL of all channels, LH of all channels, ...].
    auto x = torch::zeros({1, 2, 2, 2}, torch::kFloat64);
    x[0][1].fill_(1.0);
    const auto c = dwt2(x);
    EXPECT_DOUBLE_EQ(c[0][0][0][0].item<double>(), 0.0);
    EXPECT_DOUBLE_EQ(c[0][1][0][0].item<double>(), 2.0);
}

TEST(Dwt2, PerfectReconstructionAndEnergy) {
    fixtures::Rand rnd(77);
    for (int trial = 0; trial < 50; ++trial) {
        const auto x = rnd.normal({rnd.integer(1, 3), rnd.integer(1, 4), 2 * rnd.integer(1, 16), 2 * rnd.integer(1, 16)},
                                  torch::kFloat64);
        const auto c = dwt2(x);
        EXPECT_LT((idwt2(c) - x).abs().max().item<double>(), 1e-6);
        EXPECT_NEAR(c.pow(2).sum().item<double>(), x.pow(2).sum().item<double>(), 1e-6);
    }
}

TEST(Dwt2, Linearity) {
    fixtures::Rand rnd(8);
    const auto x = rnd.normal({2, 3, 8, 8}, torch::kFloat64);
    const auto y = rnd.normal({2, 3, 8, 8}, torch::kFloat64);
    const double a = 1.7, b = -0.4;
    EXPECT_LT((dwt2(a * x + b * y) - (a * dwt2(x) + b * dwt2(y))).abs().max().item<double>(), 1e-6);
}

TEST(Idwt2, ZerosAndImpulse) {
    EXPECT_TRUE(torch::equal(idwt2(torch::zeros({1, 4, 3, 5})), torch::zeros({1, 1, 6, 10})));
    auto x = torch::zeros({1, 1, 8, 8}, torch::kFloat64);
    x[0][0][3][5] = 1.0;
    EXPECT_LT((idwt2(dwt2(x)) - x).abs().max().item<double>(), 1e-6);
    EXPECT_NEAR(dwt2(x).abs().sum().item<double>(), 2.0, 1e-12);  // four ±1/2 coefficients
}

TEST(Dwt2, Errors) {
    EXPECT_THROW(dwt2(torch::zeros({1, 3, 7, 8})), ArgumentError);
    EXPECT_THROW(dwt2(torch::zeros({1, 3, 8, 9})), ArgumentError);
    EXPECT_THROW(idwt2(torch::zeros({1, 6, 4, 4})), Error);
}

TEST(Dwt2, Float32RoundTrip) {
    fixtures::Rand rnd(9);
    const auto x = rnd.normal({2, 3, 64, 128});
    EXPECT_LT((idwt2(dwt2(x)) - x).abs().max().item<float>(), 1e-5f);
}
