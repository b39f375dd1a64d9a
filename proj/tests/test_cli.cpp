#include "catch_amalgamated.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "camloc/export.hpp"
#include "camloc/metrics.hpp"
#include "camloc/rng.hpp"

namespace fs = std::filesystem;

namespace {

std::string binary() {
    const char* p = std::getenv("CAMLOC_BIN");
    REQUIRE(p != nullptr);
    return p;
}

int run(const std::string& args) {
    const std::string cmd = binary() + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status >= 0);
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    REQUIRE(bool(is));
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

size_t line_count(const fs::path& p) {
    std::ifstream is(p);
    size_t n = 0;
    std::string line;
    while (std::getline(is, line)) ++n;
    return n;
}

// One shared tiny pipeline so the expensive steps run once.
struct Pipeline {
    fs::path dir;
    Pipeline() {
        dir = fs::temp_directory_path() / "camloc_cli_test";
        fs::remove_all(dir);
        fs::create_directories(dir);
        const std::string d = dir.string();
        REQUIRE(run("synth --images 16 --size 32 --seed 7 --max-lesions 2 --out " + d + "/ds") == 0);
        REQUIRE(run("train --manifest " + d + "/ds/manifest.txt --epochs 2 --batch-size 4 --seed 3"
                    " --model-out " + d + "/model.camnet --log-out " + d + "/log.csv") == 0);
        REQUIRE(run("cam --model " + d + "/model.camnet --manifest " + d +
                    "/ds/manifest.txt --out " + d + "/cam") == 0);
        REQUIRE(run("propose --heatmaps " + d + "/cam --out " + d + "/props.txt") == 0);
        REQUIRE(run("eval --proposals " + d + "/props.txt --manifest " + d +
                    "/ds/manifest.txt --scores " + d + "/cam/scores.csv --out " + d + "/eval") == 0);
    }
};

Pipeline& pipeline() {
    static Pipeline p;
    return p;
}

}  // namespace

TEST_CASE("help and usage errors") {
    CHECK(run("--help") == 0);
    CHECK(run("synth --help") == 0);
    CHECK(run("") == 2);                        // a subcommand is required
    CHECK(run("frobnicate") == 2);              // unknown subcommand
    CHECK(run("synth --channels 2") == 2);      // outside the allowed set
    CHECK(run("synth --images 0") == 2);
    CHECK(run("propose --tau 1.5 --heatmaps /nonexistent") == 2);
    CHECK(run("train --epochs 5") == 2);        // --manifest is required
}

TEST_CASE("missing inputs exit with the io code") {
    CHECK(run("train --manifest /nonexistent/manifest.txt") == 3);
    CHECK(run("cam --model /nonexistent.camnet --manifest /nonexistent/m.txt") == 3);
}

TEST_CASE("pipeline produces the documented artifacts") {
    const fs::path d = pipeline().dir;
    CHECK(fs::exists(d / "model.camnet"));
    CHECK(line_count(d / "log.csv") == 3);  // header + one row per epoch
    CHECK(fs::exists(d / "cam" / "scores.csv"));
    CHECK(line_count(d / "cam" / "scores.csv") == 17);
    CHECK(fs::exists(d / "cam" / "synth_000000.cam.bin"));
    CHECK(fs::exists(d / "cam" / "synth_000000.cam.png"));
    CHECK(fs::exists(d / "cam" / "synth_000000.overlay.png"));
    CHECK(fs::exists(d / "eval" / "report.txt"));
    CHECK(fs::exists(d / "eval" / "image_level.csv"));
    CHECK(fs::exists(d / "eval" / "lesion_level.csv"));
    CHECK(fs::exists(d / "eval" / "roc.csv"));
    CHECK(fs::exists(d / "eval" / "froc_H.csv"));

    const std::string report = slurp(d / "eval" / "report.txt");
    CHECK(report.find("classification_auc") != std::string::npos);
    CHECK(report.find("specificity") != std::string::npos);
    CHECK(report.find("reference_paper_auc 0.954") != std::string::npos);
}

TEST_CASE("training and cam emission are deterministic across reruns") {
    const fs::path d = pipeline().dir;
    const std::string ds = (d / "ds" / "manifest.txt").string();
    REQUIRE(run("train --manifest " + ds + " --epochs 2 --batch-size 4 --seed 3 --model-out " +
                (d / "model2.camnet").string() + " --log-out " + (d / "log2.csv").string()) == 0);
    CHECK(slurp(d / "model.camnet") == slurp(d / "model2.camnet"));
    CHECK(slurp(d / "log.csv") == slurp(d / "log2.csv"));

    REQUIRE(run("cam --model " + (d / "model.camnet").string() + " --manifest " + ds + " --out " +
                (d / "cam2").string()) == 0);
    CHECK(slurp(d / "cam" / "synth_000003.cam.bin") == slurp(d / "cam2" / "synth_000003.cam.bin"));
    CHECK(slurp(d / "cam" / "scores.csv") == slurp(d / "cam2" / "scores.csv"));

    // a different seed must change the model
    REQUIRE(run("train --manifest " + ds + " --epochs 2 --batch-size 4 --seed 4 --model-out " +
                (d / "model_s4.camnet").string()) == 0);
    CHECK(slurp(d / "model.camnet") != slurp(d / "model_s4.camnet"));
}

TEST_CASE("synth regeneration is byte-identical per seed") {
    const fs::path d = pipeline().dir;
    REQUIRE(run("synth --images 16 --size 32 --seed 7 --max-lesions 2 --out " +
                (d / "ds_again").string()) == 0);
    CHECK(slurp(d / "ds" / "manifest.txt") == slurp(d / "ds_again" / "manifest.txt"));
    CHECK(slurp(d / "ds" / "images" / "synth_000000.png") ==
          slurp(d / "ds_again" / "images" / "synth_000000.png"));
}

TEST_CASE("raising tau never adds proposals") {
    const fs::path d = pipeline().dir;
    REQUIRE(run("propose --heatmaps " + (d / "cam").string() + " --tau 0.9 --out " +
                (d / "props_strict.txt").string()) == 0);
    CHECK(line_count(d / "props_strict.txt") <= line_count(d / "props.txt"));

    // every strict proposal's pixels appear in some lax proposal of its image
    std::ifstream strict(d / "props_strict.txt");
    std::string line;
    size_t checked = 0;
    while (std::getline(strict, line)) {
        const camloc::DecodedProposal sp = camloc::decode_proposal(line);
        bool covered = false;
        std::ifstream lax(d / "props.txt");
        std::string other;
        while (std::getline(lax, other)) {
            const camloc::DecodedProposal lp = camloc::decode_proposal(other);
            if (lp.image_id != sp.image_id) continue;
            if (camloc::intersection_count(sp.proposal.pixels, lp.proposal.pixels) ==
                int64_t(sp.proposal.pixels.size())) {
                covered = true;
                break;
            }
        }
        CHECK(covered);
        ++checked;
    }
    CHECK(checked > 0);
}

TEST_CASE("eval rejects proposals for unknown images") {
    const fs::path d = pipeline().dir;
    std::ofstream(d / "orphan.txt") << "no_such_image 0.9 0 0 1 1 4 w32,0:2,32:2\n";
    CHECK(run("eval --proposals " + (d / "orphan.txt").string() + " --manifest " +
              (d / "ds" / "manifest.txt").string() + " --scores " +
              (d / "cam" / "scores.csv").string() + " --out " + (d / "eval_orphan").string()) == 3);
}

TEST_CASE("heatmap binary sidecar round trips losslessly") {
    camloc::Heatmap hm;
    hm.width = 5;
    hm.height = 3;
    hm.class_index = 1;
    camloc::Rng rng(77);
    hm.values.resize(15);
    for (auto& v : hm.values) v = float(rng.normal());

    const fs::path p = pipeline().dir / "roundtrip.cam.bin";
    camloc::write_heatmap_binary(hm, p.string());
    const camloc::Heatmap back = camloc::read_heatmap_binary(p.string());
    CHECK(back.width == 5);
    CHECK(back.height == 3);
    CHECK(back.class_index == 1);
    CHECK(back.values == hm.values);

    CHECK_THROWS_AS(camloc::read_heatmap_binary("/nonexistent.cam.bin"), std::exception);
}

TEST_CASE("proposal records round trip through the text encoding") {
    camloc::RegionProposal p;
    p.pixels = {4, 5, 6, 36, 37, 70};  // three runs on a width-32 grid
    p.score = 0.875f;
    p.area = 6;
    p.bbox = camloc::bounding_box(p.pixels, 32);

    const std::string line = camloc::encode_proposal("img_01", p, 32);
    CHECK(line.find("w32,4:3,36:2,70:1") != std::string::npos);

    const camloc::DecodedProposal d = camloc::decode_proposal(line);
    CHECK(d.image_id == "img_01");
    CHECK(d.width == 32);
    CHECK(d.proposal.pixels == p.pixels);
    CHECK(d.proposal.score == p.score);
    CHECK(d.proposal.area == p.area);
    CHECK(d.proposal.bbox.min_x == p.bbox.min_x);
    CHECK(d.proposal.bbox.max_y == p.bbox.max_y);

    CHECK_THROWS_AS(camloc::decode_proposal("garbage"), std::exception);
}
