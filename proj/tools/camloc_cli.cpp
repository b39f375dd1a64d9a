// Command-line front end: synth / train / cam / propose / eval.
// Exit codes: 0 success, 2 usage, 3 input or IO, 4 internal invariant breach.

#include <CLI11.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <thread>

#include "camloc/camloc.hpp"

namespace fs = std::filesystem;
using namespace camloc;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitInternal = 4;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string default_out_dir() {
    const char* env = std::getenv("CAMLOC_OUT");
    return env ? env : "out";
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    for (auto& th : pool) th.join();
}

// Proposal pixels live at preprocessed resolution; evaluation happens in
// source coordinates, inverted through the crop box and square resize.
PixelSet map_pixels_to_source(const PixelSet& pixels, int proc_size, const CropBox& box,
                              int src_width) {
    PixelSet out;
    out.reserve(pixels.size());
    const double sx = proc_size > 1 ? double(box.width - 1) / double(proc_size - 1) : 0.0;
    const double sy = proc_size > 1 ? double(box.height - 1) / double(proc_size - 1) : 0.0;
    for (uint32_t p : pixels) {
        const int x = int(p % uint32_t(proc_size)), y = int(p / uint32_t(proc_size));
        const int ox = box.x0 + int(std::lround(x * sx));
        const int oy = box.y0 + int(std::lround(y * sy));
        out.push_back(pack_pixel(ox, oy, src_width));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

NetworkSpec spec_from_arch(const std::string& arch, int channels) {
    if (arch == "toy") return NetworkSpec::toy(channels);
    if (arch == "paper") return NetworkSpec::paper_shaped();
    std::ifstream is(arch);
    if (!is) throw IoError("cannot open architecture spec file: " + arch);
    std::ostringstream os;
    os << is.rdbuf();
    return NetworkSpec::from_text(os.str());
}

struct CamOutputs {
    std::map<std::string, double> scores;  // image id -> RDR softmax score
};

// Forward one image, emit heatmap artifacts, return the classifier score.
double emit_cam_for_image(Network& net, const DatasetItem& item, const PreprocessConfig& pcfg,
                          int class_index, const std::string& out_dir) {
    auto [cropped, box] = crop_black_margins(item.image, pcfg.crop_threshold);
    RawImage resized = resize(cropped, pcfg.size);
    PreprocessedImage pre = standardize(resized);
    pre.crop_box = box;

    Tensor batch({1, pre.tensor.dim(0), pre.tensor.dim(1), pre.tensor.dim(2)});
    batch.data = pre.tensor.data;
    ForwardResult res = forward(net, batch, Mode::Infer);

    const int K = res.feature_maps.dim(1), u = res.feature_maps.dim(2), v = res.feature_maps.dim(3);
    Tensor maps({K, u, v});
    std::copy(res.feature_maps.data.begin(), res.feature_maps.data.end(), maps.data.begin());
    Tensor raw = compute_cam(maps, net.classifier_weights, class_index);
    Tensor up = upsample_bilinear(raw, pcfg.size, pcfg.size);
    Heatmap hm = make_heatmap(up, class_index);

    const std::string base = (fs::path(out_dir) / item.image.id).string();
    write_heatmap_binary(hm, base + ".cam.bin");
    write_heatmap_png(hm, base + ".cam.png");
    write_overlay_png(hm, resized, base + ".overlay.png");

    const float l0 = res.logits.at2(0, 0), l1 = res.logits.at2(0, 1);
    const float m = std::max(l0, l1);
    return std::exp(l1 - m) / (std::exp(l0 - m) + std::exp(l1 - m));
}

int cmd_synth(const SynthConfig& cfg, const std::string& out_dir) {
    LabeledDataset ds = generate_synthetic(cfg);
    write_dataset(ds, out_dir);
    std::cout << "wrote " << ds.items.size() << " images to " << out_dir << "\n";
    return 0;
}

int cmd_train(const std::string& manifest, const std::string& arch, TrainConfig& tcfg,
              const PreprocessConfig& pcfg, bool augment_flag, const std::string& model_out,
              const std::string& log_out, const std::string& resume) {
    LabeledDataset ds;
    try {
        ds = read_dataset(manifest);
    } catch (const std::exception& e) {
        throw IoError(std::string("manifest: ") + e.what());
    }
    if (ds.items.empty()) throw IoError("manifest has no entries: " + manifest);

    std::vector<Tensor> images;
    std::vector<int> labels;
    for (size_t i = 0; i < ds.items.size(); ++i) {
        const auto& item = ds.items[i];
        images.push_back(preprocess(item.image, pcfg).tensor);
        labels.push_back(item.label);
        if (augment_flag) {
            RawImage aug = augment(item.image, tcfg.seed ^ (0xA06u + i), AugmentParams{});
            aug.id = item.image.id + "_aug";
            images.push_back(preprocess(aug, pcfg).tensor);
            labels.push_back(item.label);
        }
    }

    Network net = resume.empty() ? build(spec_from_arch(arch, images[0].dim(0)), tcfg.seed)
                                 : load(resume);
    auto log = train(net, images, labels, tcfg);
    save(net, model_out);

    std::ofstream os(log_out);
    if (!os) throw IoError("cannot open training log: " + log_out);
    os << "epoch,lr,loss,accuracy\n";
    for (const auto& e : log)
        os << e.epoch << "," << std::setprecision(9) << e.lr << "," << e.loss << "," << e.accuracy
           << "\n";
    std::cout << "trained " << log.size() << " epochs, final loss " << log.back().loss
              << ", accuracy " << log.back().accuracy << "\n";
    return 0;
}

int cmd_cam(const std::string& model_path, const std::string& manifest, int class_index,
            const PreprocessConfig& pcfg, int threads, const std::string& out_dir) {
    if (!fs::exists(model_path)) throw IoError("model file not found: " + model_path);
    Network net = load(model_path);
    if (class_index < 0 || class_index >= net.spec.num_classes)
        throw UsageError("class index " + std::to_string(class_index) + " out of range [0," +
                         std::to_string(net.spec.num_classes) + ")");
    LabeledDataset ds;
    try {
        ds = read_dataset(manifest);
    } catch (const std::exception& e) {
        throw IoError(std::string("manifest: ") + e.what());
    }
    fs::create_directories(out_dir);

    std::vector<double> scores(ds.items.size());
    parallel_for(static_cast<int>(ds.items.size()), threads, [&](int i) {
        scores[size_t(i)] =
            emit_cam_for_image(net, ds.items[size_t(i)], pcfg, class_index, out_dir);
    });

    std::ofstream os(fs::path(out_dir) / "scores.csv");
    os << "id,score\n";
    for (size_t i = 0; i < ds.items.size(); ++i)
        os << ds.items[i].image.id << "," << std::setprecision(9) << scores[i] << "\n";
    std::cout << "wrote CAM artifacts for " << ds.items.size() << " images to " << out_dir << "\n";
    return 0;
}

int cmd_propose(const std::string& heatmap_dir, const std::string& model_path,
                const std::string& manifest, float tau, int min_area,
                const PreprocessConfig& pcfg, int threads, const std::string& out_file) {
    std::vector<std::pair<std::string, Heatmap>> heatmaps;
    if (!heatmap_dir.empty()) {
        std::vector<fs::path> bins;
        if (fs::exists(heatmap_dir))
            for (const auto& e : fs::directory_iterator(heatmap_dir))
                if (e.path().string().ends_with(".cam.bin")) bins.push_back(e.path());
        std::sort(bins.begin(), bins.end());
        for (const auto& p : bins) {
            std::string id = p.filename().string();
            id = id.substr(0, id.size() - 8);  // strip .cam.bin
            heatmaps.emplace_back(id, read_heatmap_binary(p.string()));
        }
    } else {
        if (!fs::exists(model_path)) throw IoError("model file not found: " + model_path);
        Network net = load(model_path);
        LabeledDataset ds = read_dataset(manifest);
        fs::path tmp = fs::temp_directory_path() / "camloc_propose";
        fs::create_directories(tmp);
        for (const auto& item : ds.items) {
            emit_cam_for_image(net, item, pcfg, 1, tmp.string());
            heatmaps.emplace_back(
                item.image.id,
                read_heatmap_binary((tmp / (item.image.id + ".cam.bin")).string()));
        }
    }

    std::vector<std::vector<RegionProposal>> all(heatmaps.size());
    parallel_for(static_cast<int>(heatmaps.size()), threads,
                 [&](int i) { all[size_t(i)] = propose(heatmaps[size_t(i)].second, tau, min_area); });

    if (auto parent = fs::path(out_file).parent_path(); !parent.empty())
        fs::create_directories(parent);
    std::ofstream os(out_file);
    if (!os) throw IoError("cannot open output file: " + out_file);
    for (size_t i = 0; i < heatmaps.size(); ++i)
        for (const auto& p : all[i])
            os << encode_proposal(heatmaps[i].first, p, heatmaps[i].second.width) << "\n";
    std::cout << "wrote proposals for " << heatmaps.size() << " heatmaps to " << out_file << "\n";
    return 0;
}

void write_report_files(const EvalReport& rep, const std::string& out_dir) {
    fs::create_directories(out_dir);
    auto pct = [](double v) {
        std::ostringstream os;
        if (v < 0) os << "n/a";
        else os << std::fixed << std::setprecision(1) << v * 100.0;
        return os.str();
    };

    {
        std::ofstream os(fs::path(out_dir) / "report.txt");
        os << "classification_auc " << (rep.classification_auc < 0 ? -1 : rep.classification_auc)
           << "\n";
        os << "classification_sensitivity " << rep.classification_sensitivity << "\n";
        os << "specificity " << rep.specificity << "\n";
        os << "healthy_images " << rep.healthy_images << "\n";
        os << "diseased_images " << rep.diseased_images << "\n";
        os << "operating_threshold " << rep.operating_threshold << "\n";
        for (const auto& tr : rep.per_type) {
            os << lesion_name(tr.froc.lesion_type) << " images_with_type " << tr.images_with_type
               << " se50 " << tr.sensitivity_50 << " se_onepixel " << tr.sensitivity_onepixel
               << " lesion_se " << tr.operating_sensitivity << " fps_per_image "
               << tr.operating_fps_per_image << "\n";
        }
        os << "reference_paper_auc " << rep.reference.auc << "\n";
        os << "reference_paper_sensitivity " << rep.reference.sensitivity << "\n";
        os << "reference_paper_specificity " << rep.reference.specificity << "\n";
    }
    {
        // image-level sensitivities, one row per method as in the published table
        std::ofstream os(fs::path(out_dir) / "image_level.csv");
        os << "method,H,HE,SE,RSD\n";
        os << "ours_50overlap";
        for (const auto& tr : rep.per_type) os << "," << pct(tr.sensitivity_50);
        os << "\nours_onepixel";
        for (const auto& tr : rep.per_type) os << "," << pct(tr.sensitivity_onepixel);
        os << "\nreference_50overlap";
        for (double v : rep.reference.image_se_50) os << "," << v;
        os << "\nreference_onepixel";
        for (double v : rep.reference.image_se_onepixel) os << "," << v;
        os << "\n";
    }
    {
        std::ofstream os(fs::path(out_dir) / "lesion_level.csv");
        os << "method,H_se,H_fpi,HE_se,HE_fpi,SE_se,SE_fpi,RSD_se,RSD_fpi\n";
        os << "ours";
        for (const auto& tr : rep.per_type)
            os << "," << pct(tr.operating_sensitivity) << ","
               << (tr.operating_fps_per_image < 0 ? -1.0 : tr.operating_fps_per_image);
        os << "\nreference_50overlap";
        for (const auto& [se, fpi] : rep.reference.lesion_50) os << "," << se << "," << fpi;
        os << "\nreference_onepixel";
        for (const auto& [se, fpi] : rep.reference.lesion_onepixel) os << "," << se << "," << fpi;
        os << "\n";
    }
    for (const auto& tr : rep.per_type) {
        if (tr.froc.points.empty()) continue;
        std::ofstream os(fs::path(out_dir) /
                         ("froc_" + std::string(lesion_code(tr.froc.lesion_type)) + ".csv"));
        os << "threshold,fps_per_image,sensitivity\n";
        for (const auto& p : tr.froc.points)
            os << p.threshold << "," << p.fps_per_image << "," << p.sensitivity << "\n";
    }
}

void write_roc_csv(const std::vector<ImageEval>& images, const std::string& out_dir) {
    std::vector<double> thresholds;
    for (const auto& img : images) thresholds.push_back(img.classifier_score);
    std::sort(thresholds.begin(), thresholds.end());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
    std::ofstream os(fs::path(out_dir) / "roc.csv");
    os << "threshold,fpr,tpr\n";
    for (double t : thresholds) {
        int tp = 0, fp = 0, pos = 0, neg = 0;
        for (const auto& img : images) {
            if (img.label == 1) {
                ++pos;
                if (img.classifier_score >= t) ++tp;
            } else {
                ++neg;
                if (img.classifier_score >= t) ++fp;
            }
        }
        os << t << "," << (neg ? double(fp) / neg : 0.0) << "," << (pos ? double(tp) / pos : 0.0)
           << "\n";
    }
}

int cmd_eval(const std::string& proposals_path, const std::string& manifest,
             const std::string& scores_path, double operating_threshold,
             const PreprocessConfig& pcfg, const std::string& out_dir) {
    LabeledDataset ds;
    try {
        ds = read_dataset(manifest);
    } catch (const std::exception& e) {
        throw IoError(std::string("manifest: ") + e.what());
    }

    std::map<std::string, size_t> index;
    std::vector<ImageEval> images(ds.items.size());
    std::vector<CropBox> boxes(ds.items.size());
    for (size_t i = 0; i < ds.items.size(); ++i) {
        const auto& item = ds.items[i];
        images[i].id = item.image.id;
        images[i].label = item.label;
        images[i].ground_truth = item.regions;
        boxes[i] = crop_black_margins(item.image, pcfg.crop_threshold).second;
        index[item.image.id] = i;
    }

    std::vector<std::string> orphans;
    {
        std::ifstream is(proposals_path);
        if (!is) throw IoError("cannot open proposals file: " + proposals_path);
        std::string line;
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            DecodedProposal dp = decode_proposal(line);
            auto it = index.find(dp.image_id);
            if (it == index.end()) {
                orphans.push_back(dp.image_id);
                continue;
            }
            const size_t i = it->second;
            dp.proposal.pixels = map_pixels_to_source(dp.proposal.pixels, dp.width, boxes[i],
                                                      ds.items[i].image.width);
            dp.proposal.area = static_cast<int>(dp.proposal.pixels.size());
            dp.proposal.bbox = bounding_box(dp.proposal.pixels, ds.items[i].image.width);
            images[i].proposals.push_back(std::move(dp.proposal));
        }
    }
    {
        std::ifstream is(scores_path);
        if (!is) throw IoError("cannot open scores file: " + scores_path);
        std::string line;
        std::getline(is, line);  // header
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            const auto comma = line.find(',');
            if (comma == std::string::npos) throw IoError("malformed scores line: " + line);
            const std::string id = line.substr(0, comma);
            auto it = index.find(id);
            if (it == index.end()) {
                orphans.push_back(id);
                continue;
            }
            images[it->second].classifier_score = std::stod(line.substr(comma + 1));
        }
    }
    if (!orphans.empty()) {
        std::sort(orphans.begin(), orphans.end());
        orphans.erase(std::unique(orphans.begin(), orphans.end()), orphans.end());
        std::ostringstream os;
        os << "ids not present in manifest:";
        for (const auto& id : orphans) os << " " << id;
        throw IoError(os.str());
    }

    EvalReport rep = report(images, operating_threshold);
    write_report_files(rep, out_dir);
    write_roc_csv(images, out_dir);
    std::cout << "report written to " << out_dir << " (auc "
              << (rep.classification_auc < 0 ? -1.0 : rep.classification_auc) << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weakly-supervised lesion localization via class activation maps"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config")->configurable(false);

    int threads = 1;
    uint64_t seed = 1;
    std::string out_dir = default_out_dir();
    app.add_option("--threads", threads, "Worker threads for per-image stages")
        ->capture_default_str();
    app.add_option("--seed", seed, "Global RNG seed")->capture_default_str();

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic labeled dataset");
    SynthConfig scfg;
    std::string synth_out = out_dir + "/dataset";
    synth->add_option("--images", scfg.num_images, "Number of images")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    synth->add_option("--size", scfg.size, "Image side in pixels")
        ->check(CLI::Range(16, 4096))
        ->capture_default_str();
    synth->add_option("--channels", scfg.channels, "1 (gray) or 3 (rgb)")
        ->check(CLI::IsMember({1, 3}))
        ->capture_default_str();
    synth->add_option("--diseased-fraction", scfg.diseased_fraction, "Fraction of RDR images")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    synth->add_option("--min-lesions", scfg.min_lesions, "Minimum lesions per diseased image")
        ->capture_default_str();
    synth->add_option("--max-lesions", scfg.max_lesions, "Maximum lesions per diseased image")
        ->capture_default_str();
    synth->add_flag("--expert-noise", scfg.expert_noise,
                    "Simulate four noisy experts and fuse their masks");
    std::vector<std::string> type_codes;
    synth->add_option("--types", type_codes, "Lesion types to enable (H HE SE RSD)");
    synth->add_option("--out", synth_out, "Output dataset directory")->capture_default_str();

    // train
    auto* train_cmd = app.add_subcommand("train", "Train a CAM network on a dataset manifest");
    std::string manifest, arch = "toy", model_out = out_dir + "/model.camnet",
                          log_out = out_dir + "/train_log.csv", resume;
    TrainConfig tcfg;
    PreprocessConfig pcfg;
    pcfg.size = 64;
    bool augment_flag = false;
    train_cmd->add_option("--manifest", manifest, "Dataset manifest path")->required();
    train_cmd->add_option("--arch", arch, "toy | paper | path to a spec file")
        ->capture_default_str();
    train_cmd->add_option("--epochs", tcfg.epochs, "Training epochs")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    train_cmd->add_option("--batch-size", tcfg.batch_size, "Batch size (>= 2)")
        ->check(CLI::Range(2, 4096))
        ->capture_default_str();
    train_cmd->add_option("--lr", tcfg.optimizer.base_lr, "Initial learning rate")
        ->capture_default_str();
    train_cmd->add_option("--momentum", tcfg.optimizer.momentum, "SGD momentum")
        ->capture_default_str();
    train_cmd->add_option("--weight-decay", tcfg.optimizer.weight_decay, "L2 weight decay")
        ->capture_default_str();
    train_cmd->add_option("--lr-decay", tcfg.optimizer.decay_per_epoch,
                          "Fractional LR decay per epoch")
        ->capture_default_str();
    train_cmd->add_option("--size", pcfg.size, "Preprocessed image side")->capture_default_str();
    train_cmd->add_flag("--augment", augment_flag, "Add one augmented copy of each image");
    train_cmd->add_option("--resume", resume, "Continue from an existing model file");
    train_cmd->add_option("--model-out", model_out, "Model output path")->capture_default_str();
    train_cmd->add_option("--log-out", log_out, "Training log CSV path")->capture_default_str();

    // cam
    auto* cam_cmd = app.add_subcommand("cam", "Emit heatmaps and overlays for a model");
    std::string model_path, cam_manifest, cam_out = out_dir + "/cam";
    int class_index = 1;
    PreprocessConfig cam_pcfg;
    cam_pcfg.size = 64;
    cam_cmd->add_option("--model", model_path, "Model file")->required();
    cam_cmd->add_option("--manifest", cam_manifest, "Dataset manifest path")->required();
    cam_cmd->add_option("--class", class_index, "Class index to explain (1 = RDR)")
        ->capture_default_str();
    cam_cmd->add_option("--size", cam_pcfg.size, "Preprocessed image side")->capture_default_str();
    cam_cmd->add_option("--out", cam_out, "Output directory")->capture_default_str();

    // propose
    auto* prop_cmd = app.add_subcommand("propose", "Extract region proposals from heatmaps");
    std::string heatmap_dir, prop_model, prop_manifest,
        prop_out = out_dir + "/proposals.txt";
    float tau = 0.65f;
    int min_area = 4;
    PreprocessConfig prop_pcfg;
    prop_pcfg.size = 64;
    prop_cmd->add_option("--heatmaps", heatmap_dir, "Directory of .cam.bin files");
    prop_cmd->add_option("--model", prop_model, "Model file (used when --heatmaps is absent)");
    prop_cmd->add_option("--manifest", prop_manifest, "Dataset manifest (with --model)");
    prop_cmd->add_option("--tau", tau, "Threshold on the normalized heatmap")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    prop_cmd->add_option("--min-area", min_area, "Minimum component area in pixels")
        ->capture_default_str();
    prop_cmd->add_option("--size", prop_pcfg.size, "Preprocessed image side")
        ->capture_default_str();
    prop_cmd->add_option("--out", prop_out, "Output proposals file")->capture_default_str();

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Two-level evaluation against ground truth");
    std::string eval_proposals, eval_manifest, eval_scores, eval_out = out_dir + "/eval";
    double operating_threshold = 0.65;
    PreprocessConfig eval_pcfg;
    eval_pcfg.size = 64;
    eval_cmd->add_option("--proposals", eval_proposals, "Proposals file")->required();
    eval_cmd->add_option("--manifest", eval_manifest, "Dataset manifest path")->required();
    eval_cmd->add_option("--scores", eval_scores, "Classifier scores CSV (id,score)")->required();
    eval_cmd->add_option("--threshold", operating_threshold,
                         "Operating score threshold for lesion-level counts")
        ->capture_default_str();
    eval_cmd->add_option("--size", eval_pcfg.size, "Preprocessed image side")
        ->capture_default_str();
    eval_cmd->add_option("--out", eval_out, "Output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        if (*synth) {
            scfg.seed = seed;
            if (!type_codes.empty()) {
                scfg.types_enabled = {false, false, false, false};
                for (const auto& c : type_codes)
                    scfg.types_enabled[static_cast<size_t>(lesion_from_code(c))] = true;
            }
            std::error_code ec;
            fs::create_directories(synth_out, ec);
            if (ec) throw IoError("cannot create output directory: " + synth_out);
            return cmd_synth(scfg, synth_out);
        }
        if (*train_cmd) {
            tcfg.seed = seed;
            tcfg.augment = augment_flag;
            if (auto parent = fs::path(model_out).parent_path(); !parent.empty())
                fs::create_directories(parent);
            if (auto parent = fs::path(log_out).parent_path(); !parent.empty())
                fs::create_directories(parent);
            return cmd_train(manifest, arch, tcfg, pcfg, augment_flag, model_out, log_out, resume);
        }
        if (*cam_cmd)
            return cmd_cam(model_path, cam_manifest, class_index, cam_pcfg, threads, cam_out);
        if (*prop_cmd)
            return cmd_propose(heatmap_dir, prop_model, prop_manifest, tau, min_area, prop_pcfg,
                               threads, prop_out);
        if (*eval_cmd)
            return cmd_eval(eval_proposals, eval_manifest, eval_scores, operating_threshold,
                            eval_pcfg, eval_out);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const ModelIoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return 0;
}
