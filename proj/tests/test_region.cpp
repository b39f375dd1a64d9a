#include "catch_amalgamated.hpp"

#include <set>

#include "camloc/region.hpp"
#include "camloc/rng.hpp"

using namespace camloc;

namespace {

Heatmap heatmap_from(const std::vector<float>& values, int width, int height,
                     bool normalized = false) {
    Heatmap hm;
    hm.width = width;
    hm.height = height;
    hm.values = values;
    hm.normalized = normalized;
    return hm;
}

// Reference component labelling: repeated flood fill over an explicit frontier
// set, independent of the scan-and-grow implementation under test.
std::vector<PixelSet> flood_fill_oracle(const std::vector<uint8_t>& mask, int w, int h) {
    std::vector<int> label(mask.size(), -1);
    int next = 0;
    for (size_t s = 0; s < mask.size(); ++s) {
        if (!mask[s] || label[s] >= 0) continue;
        std::set<uint32_t> frontier{static_cast<uint32_t>(s)};
        while (!frontier.empty()) {
            const uint32_t p = *frontier.begin();
            frontier.erase(frontier.begin());
            if (label[p] >= 0) continue;
            label[p] = next;
            const int x = int(p % uint32_t(w)), y = int(p / uint32_t(w));
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const int nx = x + dx, ny = y + dy;
                    if (nx < 0 || ny < 0 || nx >= w || ny >= h || (dx == 0 && dy == 0)) continue;
                    const size_t q = size_t(ny) * w + nx;
                    if (mask[q] && label[q] < 0) frontier.insert(uint32_t(q));
                }
        }
        ++next;
    }
    std::vector<PixelSet> comps(next);
    for (size_t p = 0; p < mask.size(); ++p)
        if (label[p] >= 0) comps[label[p]].push_back(uint32_t(p));
    return comps;  // already in raster order of first pixel and sorted
}

}  // namespace

TEST_CASE("threshold is inclusive at tau and validates its range") {
    Heatmap hm = heatmap_from({0.0f, 0.649f, 0.65f, 1.0f}, 4, 1, true);
    CHECK(threshold(hm, 0.65f) == std::vector<uint8_t>({0, 0, 1, 1}));
    CHECK(threshold(hm, 0.0f) == std::vector<uint8_t>({1, 1, 1, 1}));
    CHECK(threshold(hm, 1.0f) == std::vector<uint8_t>({0, 0, 0, 1}));
    CHECK_THROWS_AS(threshold(hm, -0.1f), std::invalid_argument);
    CHECK_THROWS_AS(threshold(hm, 1.1f), std::invalid_argument);
}

TEST_CASE("connected components: hand-picked masks") {
    SECTION("diagonal pixels join under 8-connectivity") {
        std::vector<uint8_t> mask = {1, 0, 0,  //
                                     0, 1, 0,  //
                                     0, 0, 1};
        auto comps = connected_components(mask, 3, 3);
        REQUIRE(comps.size() == 1);
        CHECK(comps[0] == PixelSet({0, 4, 8}));
    }
    SECTION("a gap of one empty column separates components") {
        std::vector<uint8_t> mask = {1, 0, 1,  //
                                     1, 0, 1,  //
                                     0, 0, 1};
        auto comps = connected_components(mask, 3, 3);
        REQUIRE(comps.size() == 2);
        CHECK(comps[0] == PixelSet({0, 3}));
        CHECK(comps[1] == PixelSet({2, 5, 8}));
    }
    SECTION("empty mask") {
        CHECK(connected_components(std::vector<uint8_t>(9, 0), 3, 3).empty());
    }
    SECTION("full mask is one component") {
        auto comps = connected_components(std::vector<uint8_t>(12, 1), 4, 3);
        REQUIRE(comps.size() == 1);
        CHECK(comps[0].size() == 12);
    }
    SECTION("size mismatch is rejected") {
        CHECK_THROWS_AS(connected_components(std::vector<uint8_t>(9, 0), 4, 3),
                        std::invalid_argument);
    }
}

TEST_CASE("connected components match a flood-fill oracle on random masks") {
    Rng rng(404);
    for (int trial = 0; trial < 50; ++trial) {
        const int w = 2 + int(rng.below(14)), h = 2 + int(rng.below(14));
        std::vector<uint8_t> mask(size_t(w) * h);
        const double density = 0.2 + 0.6 * rng.uniform();
        for (auto& m : mask) m = rng.uniform() < density ? 1 : 0;
        auto got = connected_components(mask, w, h);
        auto want = flood_fill_oracle(mask, w, h);
        REQUIRE(got.size() == want.size());
        for (size_t i = 0; i < got.size(); ++i) CHECK(got[i] == want[i]);
    }
}

TEST_CASE("propose matches a hand-enumerated 8x8 oracle") {
    // Two bright blobs (one above tau with area >= 4, one smaller than min
    // area) and one mid blob below tau after normalization.
    std::vector<float> v(64, 0.0f);
    auto set = [&](int x, int y, float val) { v[size_t(y) * 8 + x] = val; };
    // blob A: 2x2 at (1,1), peak 10
    set(1, 1, 10.0f);
    set(2, 1, 9.0f);
    set(1, 2, 9.0f);
    set(2, 2, 8.0f);
    // blob B: 3 pixels at (6,1), values 9.5 -- dropped by min_area=4
    set(6, 1, 9.5f);
    set(7, 1, 9.5f);
    set(6, 2, 9.5f);
    // blob C: 2x2 at (5,6), value 5 -- 0.5 normalized, below tau
    set(5, 6, 5.0f);
    set(6, 6, 5.0f);
    set(5, 7, 5.0f);
    set(6, 7, 5.0f);

    auto props = propose(heatmap_from(v, 8, 8), 0.65f, 4);
    REQUIRE(props.size() == 1);
    CHECK(props[0].pixels == PixelSet({9, 10, 17, 18}));
    CHECK(props[0].area == 4);
    CHECK(props[0].score == 1.0f);  // contains the global max
    CHECK(props[0].bbox.min_x == 1);
    CHECK(props[0].bbox.min_y == 1);
    CHECK(props[0].bbox.max_x == 2);
    CHECK(props[0].bbox.max_y == 2);

    // with min_area=1 blob B survives; its score is 0.95 so it ranks second
    auto all = propose(heatmap_from(v, 8, 8), 0.65f, 1);
    REQUIRE(all.size() == 2);
    CHECK(all[0].score == 1.0f);
    CHECK(all[1].pixels == PixelSet({14, 15, 22}));
    CHECK(all[1].score == 0.95f);
}

TEST_CASE("propose on a constant heatmap yields nothing") {
    auto props = propose(heatmap_from(std::vector<float>(64, 7.0f), 8, 8), 0.65f, 1);
    CHECK(props.empty());  // constant maps normalize to zero
}

TEST_CASE("proposal invariants on random heatmaps") {
    Rng rng(505);
    for (int trial = 0; trial < 30; ++trial) {
        const int w = 4 + int(rng.below(20)), h = 4 + int(rng.below(20));
        std::vector<float> v(size_t(w) * h);
        for (auto& x : v) x = float(rng.normal());
        const Heatmap hm = heatmap_from(v, w, h);

        auto props = propose(hm, 0.65f, 1);
        std::set<uint32_t> all_pixels;
        float prev = 2.0f;
        for (const auto& p : props) {
            CHECK(p.area == int(p.pixels.size()));
            CHECK(p.score <= prev);  // sorted descending
            prev = p.score;
            CHECK(p.score >= 0.65f);
            CHECK(p.score <= 1.0f);
            CHECK(std::is_sorted(p.pixels.begin(), p.pixels.end()));
            for (uint32_t px : p.pixels) CHECK(all_pixels.insert(px).second);  // disjoint
            const auto bb = bounding_box(p.pixels, w);
            CHECK(bb.min_x == p.bbox.min_x);
            CHECK(bb.max_y == p.bbox.max_y);
        }
        // the global maximum always appears; its normalized score rounds to 1
        if (!props.empty()) CHECK(props[0].score >= 1.0f - 1e-6f);
        const size_t argmax = size_t(std::max_element(v.begin(), v.end()) - v.begin());
        CHECK(all_pixels.count(uint32_t(argmax)) == 1);

        // raising tau can only shrink the proposed pixel set
        auto strict = propose(hm, 0.8f, 1);
        std::set<uint32_t> strict_pixels;
        for (const auto& p : strict) strict_pixels.insert(p.pixels.begin(), p.pixels.end());
        for (uint32_t px : strict_pixels) CHECK(all_pixels.count(px) == 1);
        CHECK(strict_pixels.size() <= all_pixels.size());

        // proposals are invariant under positive affine rescaling of the map
        std::vector<float> scaled(v.size());
        for (size_t i = 0; i < v.size(); ++i) scaled[i] = 3.5f * v[i] + 11.0f;
        auto affine = propose(heatmap_from(scaled, w, h), 0.65f, 1);
        REQUIRE(affine.size() == props.size());
        for (size_t i = 0; i < props.size(); ++i) CHECK(affine[i].pixels == props[i].pixels);

        // min-area filtering keeps exactly the large-enough components
        auto filtered = propose(hm, 0.65f, 3);
        size_t expect = 0;
        for (const auto& p : props)
            if (p.area >= 3) ++expect;
        CHECK(filtered.size() == expect);
    }
}
