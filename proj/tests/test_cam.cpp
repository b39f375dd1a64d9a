#include "catch_amalgamated.hpp"

#include "camloc/cam.hpp"
#include "camloc/network.hpp"
#include "helpers.hpp"

using namespace camloc;
using camloc::testing::random_dtensor;

TEST_CASE("cam of a single unit-weight map reproduces it") {
    DTensor fm({1, 2, 2});
    fm.data = {1.0, 2.0, 3.0, 4.0};
    DTensor w({2, 1});
    w.data = {0.0, 1.0};
    DTensor out = compute_cam(fm, w, 1);
    CHECK(out.data == std::vector<double>({1.0, 2.0, 3.0, 4.0}));
    DTensor zero = compute_cam(fm, w, 0);
    CHECK(zero.data == std::vector<double>({0.0, 0.0, 0.0, 0.0}));
}

TEST_CASE("opposite-weighted identical maps cancel") {
    DTensor fm({2, 3, 3});
    for (int i = 0; i < 9; ++i) fm.data[i] = fm.data[9 + i] = double(i) * 0.5 - 1.0;
    DTensor w({1, 2});
    w.data = {1.0, -1.0};
    DTensor out = compute_cam(fm, w, 0);
    for (double v : out.data) CHECK(v == 0.0);
}

TEST_CASE("cam matches a naive loop oracle on random inputs") {
    Rng rng(101);
    for (int trial = 0; trial < 10; ++trial) {
        const int K = 1 + int(rng.below(6)), u = 2 + int(rng.below(5)), v = 2 + int(rng.below(5));
        const int C = 2 + int(rng.below(3));
        DTensor fm = random_dtensor({K, u, v}, rng);
        DTensor w = random_dtensor({C, K}, rng);
        const int c = int(rng.below(uint64_t(C)));
        DTensor got = compute_cam(fm, w, c);
        for (int x = 0; x < u; ++x)
            for (int y = 0; y < v; ++y) {
                double want = 0.0;
                for (int k = 0; k < K; ++k) want += w.at2(c, k) * fm.at3(k, x, y);
                CHECK(std::abs(got[int64_t(x) * v + y] - want) < 1e-12);
            }
    }
}

TEST_CASE("cam is linear in the weights") {
    Rng rng(77);
    DTensor fm = random_dtensor({4, 3, 3}, rng);
    DTensor w1 = random_dtensor({1, 4}, rng), w2 = random_dtensor({1, 4}, rng);
    DTensor wsum({1, 4});
    for (int k = 0; k < 4; ++k) wsum.data[k] = 2.0 * w1.data[k] + 0.5 * w2.data[k];
    DTensor a = compute_cam(fm, w1, 0), b = compute_cam(fm, w2, 0), s = compute_cam(fm, wsum, 0);
    for (int i = 0; i < 9; ++i) CHECK(std::abs(s.data[i] - (2.0 * a.data[i] + 0.5 * b.data[i])) < 1e-12);
}

TEST_CASE("cam argument validation") {
    DTensor fm({2, 3, 3});
    DTensor w({2, 2});
    CHECK_THROWS_AS(compute_cam(fm, w, 2), std::invalid_argument);
    CHECK_THROWS_AS(compute_cam(fm, w, -1), std::invalid_argument);
    DTensor bad_w({2, 3});
    CHECK_THROWS_AS(compute_cam(fm, bad_w, 0), std::invalid_argument);
}

TEST_CASE("upsample preserves corners and is bounded by the input range") {
    Rng rng(13);
    DTensor m = random_dtensor({4, 5}, rng);
    const auto [lo_it, hi_it] = std::minmax_element(m.data.begin(), m.data.end());
    DTensor up = upsample_bilinear(m, 17, 23);
    CHECK(up[0] == m[0]);
    CHECK(up[22] == m.at2(0, 4));
    CHECK(up[16 * 23] == m.at2(3, 0));
    CHECK(up[16 * 23 + 22] == m.at2(3, 4));
    for (double v : up.data) {
        CHECK(v >= *lo_it - 1e-12);
        CHECK(v <= *hi_it + 1e-12);
    }
}

TEST_CASE("2x2 to 3x3 upsample places averages at midpoints") {
    DTensor m({2, 2});
    m.data = {0.0, 1.0, 1.0, 0.0};
    DTensor up = upsample_bilinear(m, 3, 3);
    CHECK(up.at2(0, 1) == Catch::Approx(0.5));
    CHECK(up.at2(1, 0) == Catch::Approx(0.5));
    CHECK(up.at2(1, 1) == Catch::Approx(0.5));  // centre of the bilinear patch
    CHECK(up.at2(1, 2) == Catch::Approx(0.5));
    CHECK(up.at2(2, 1) == Catch::Approx(0.5));
}

TEST_CASE("2x2 to 4x4 upsample matches the hand-computed grid") {
    DTensor m({2, 2});
    m.data = {0.0, 3.0, 6.0, 9.0};
    DTensor up = upsample_bilinear(m, 4, 4);
    // interpolation positions are {0, 1/3, 2/3, 1} along each axis
    const double want[4][4] = {{0, 1, 2, 3}, {2, 3, 4, 5}, {4, 5, 6, 7}, {6, 7, 8, 9}};
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) CHECK(up.at2(y, x) == Catch::Approx(want[y][x]));
}

TEST_CASE("upsample rejects shrinking") {
    DTensor m({4, 4});
    CHECK_THROWS_AS(upsample_bilinear(m, 3, 4), std::invalid_argument);
    CHECK_THROWS_AS(upsample_bilinear(m, 4, 3), std::invalid_argument);
}

TEST_CASE("class score from cam equals the network logit") {
    Network net = build(NetworkSpec::toy(), 55);
    Rng rng(56);
    Tensor batch({1, 1, 64, 64});
    for (auto& v : batch.data) v = float(rng.normal());
    auto res = forward(net, batch, Mode::Infer);
    const int K = res.feature_maps.dim(1), u = res.feature_maps.dim(2), v = res.feature_maps.dim(3);
    DTensor fm({K, u, v});
    for (int64_t i = 0; i < fm.size(); ++i) fm[i] = double(res.feature_maps[i]);
    DTensor w = net.classifier_weights.cast<double>();
    for (int c = 0; c < 2; ++c) {
        DTensor cam = compute_cam(fm, w, c);
        const double score = class_score_from_cam(cam, double(net.classifier_bias[c]));
        CHECK(std::abs(score - double(res.logits.at2(0, c))) < 1e-4);
    }
}

TEST_CASE("heatmap normalization maps range to [0,1] and constants to zero") {
    Heatmap hm;
    hm.width = hm.height = 2;
    hm.values = {-2.0f, 0.0f, 2.0f, 6.0f};
    normalize_heatmap(hm);
    CHECK(hm.normalized);
    CHECK(hm.values == std::vector<float>({0.0f, 0.25f, 0.5f, 1.0f}));

    Heatmap flat;
    flat.width = flat.height = 2;
    flat.values = {3.0f, 3.0f, 3.0f, 3.0f};
    normalize_heatmap(flat);
    CHECK(flat.values == std::vector<float>({0.0f, 0.0f, 0.0f, 0.0f}));
}
