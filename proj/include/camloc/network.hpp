#pragma once

#include <cstdio>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "camloc/layers.hpp"
#include "camloc/optimizer.hpp"
#include "camloc/rng.hpp"
#include "camloc/tensor.hpp"

namespace camloc {

// Conv stack with a GAP head. The only dense layer sits after the GAP;
// intermediate dense layers are rejected by construction and validation.
struct ConvLayerSpec {
    int kernels = 0;
    int ksize = 3;
    int stride = 1;
    bool batchnorm = true;
    bool relu = true;
};

struct NetworkSpec {
    int input_h = 0, input_w = 0, input_channels = 0;
    std::vector<ConvLayerSpec> layers;
    int num_classes = 2;
    int min_map_side = 8;

    static int same_padding(int ksize) { return (ksize - 1) / 2; }

    // Spatial size after layer index `upto` (exclusive); whole stack by default.
    std::pair<int, int> map_size(int upto = -1) const {
        int h = input_h, w = input_w;
        const int n = upto < 0 ? static_cast<int>(layers.size()) : upto;
        for (int i = 0; i < n; ++i) {
            const auto& l = layers[static_cast<size_t>(i)];
            auto [oh, ow] = conv_output_size(h, w, l.ksize, l.ksize, l.stride, same_padding(l.ksize));
            h = oh;
            w = ow;
        }
        return {h, w};
    }

    int feature_count() const { return layers.empty() ? 0 : layers.back().kernels; }

    void validate() const {
        check(input_h >= 8 && input_w >= 8 && (input_channels == 1 || input_channels == 3),
              "spec: input must be at least 8x8 with 1 or 3 channels");
        check(!layers.empty(), "spec: at least one convolutional layer required");
        check(num_classes >= 2, "spec: at least two classes required");
        for (const auto& l : layers) {
            check(l.kernels >= 1, "spec: conv layer needs at least one kernel");
            check(l.ksize >= 1 && l.ksize % 2 == 1, "spec: kernel size must be odd and positive");
            check(l.stride >= 1, "spec: stride must be positive");
        }
        auto [u, v] = map_size();
        check(u >= min_map_side && v >= min_map_side,
              "spec: final feature maps are " + std::to_string(u) + "x" + std::to_string(v) +
                  ", below the minimum side " + std::to_string(min_map_side));
    }

    std::string to_text() const {
        std::ostringstream os;
        os << "input " << input_h << " " << input_w << " " << input_channels << "\n";
        for (const auto& l : layers)
            os << "conv kernels=" << l.kernels << " size=" << l.ksize << " stride=" << l.stride
               << " bn=" << (l.batchnorm ? 1 : 0) << " relu=" << (l.relu ? 1 : 0) << "\n";
        os << "classes " << num_classes << "\n";
        return os.str();
    }

    static NetworkSpec from_text(const std::string& text) {
        NetworkSpec spec;
        std::istringstream is(text);
        std::string line;
        bool saw_input = false, saw_classes = false;
        while (std::getline(is, line)) {
            if (line.empty() || line[0] == '#') continue;
            std::istringstream ls(line);
            std::string tok;
            ls >> tok;
            if (tok == "input") {
                check(bool(ls >> spec.input_h >> spec.input_w >> spec.input_channels),
                      "spec parse: malformed input line: " + line);
                saw_input = true;
            } else if (tok == "conv") {
                ConvLayerSpec l;
                std::string kv;
                while (ls >> kv) {
                    const auto eq = kv.find('=');
                    check(eq != std::string::npos, "spec parse: expected key=value, got " + kv);
                    const std::string key = kv.substr(0, eq);
                    const int val = std::stoi(kv.substr(eq + 1));
                    if (key == "kernels") l.kernels = val;
                    else if (key == "size") l.ksize = val;
                    else if (key == "stride") l.stride = val;
                    else if (key == "bn") l.batchnorm = val != 0;
                    else if (key == "relu") l.relu = val != 0;
                    else check(false, "spec parse: unknown key " + key);
                }
                spec.layers.push_back(l);
            } else if (tok == "classes") {
                check(bool(ls >> spec.num_classes), "spec parse: malformed classes line");
                saw_classes = true;
            } else if (tok == "dense") {
                check(false, "spec parse: dense layers are not allowed outside the GAP head");
            } else {
                check(false, "spec parse: unknown directive " + tok);
            }
        }
        check(saw_input && saw_classes, "spec parse: missing input or classes line");
        spec.validate();
        return spec;
    }

    // Paper-shaped configuration: 512x512x3 input, final 32x32x1024 maps.
    static NetworkSpec paper_shaped() {
        NetworkSpec s;
        s.input_h = s.input_w = 512;
        s.input_channels = 3;
        s.layers = {
            {32, 3, 1, true, true},   {32, 3, 2, true, true},  {64, 3, 1, true, true},
            {64, 3, 2, true, true},   {128, 3, 2, true, true}, {256, 3, 2, true, true},
            {512, 3, 1, true, true},  {1024, 3, 1, true, true},
        };
        s.num_classes = 2;
        return s;
    }

    // Desk-scale configuration: 64x64 input, 16x16 final maps.
    static NetworkSpec toy(int channels = 1, int feature_maps = 32) {
        NetworkSpec s;
        s.input_h = s.input_w = 64;
        s.input_channels = channels;
        s.layers = {
            {8, 3, 1, true, true},
            {16, 3, 2, true, true},
            {feature_maps, 3, 2, true, true},
            {feature_maps, 3, 1, true, true},
        };
        s.num_classes = 2;
        return s;
    }
};

struct ConvLayerParams {
    Tensor kernels, bias;    // always present
    Tensor gamma, beta;      // batch norm affine, empty when bn disabled
    BnStats<float> stats;
};

struct Network {
    NetworkSpec spec;
    std::vector<ConvLayerParams> layers;
    Tensor classifier_weights;  // [C,K]
    Tensor classifier_bias;     // [C]
};

inline Network build(const NetworkSpec& spec, uint64_t seed) {
    spec.validate();
    Network net;
    net.spec = spec;
    Rng rng(seed);
    int in_ch = spec.input_channels;
    for (const auto& l : spec.layers) {
        ConvLayerParams p;
        p.kernels = Tensor({l.kernels, in_ch, l.ksize, l.ksize});
        const double scale = std::sqrt(2.0 / (double(in_ch) * l.ksize * l.ksize));
        for (auto& v : p.kernels.data) v = float(rng.normal() * scale);
        p.bias = Tensor({l.kernels});
        if (l.batchnorm) {
            p.gamma = Tensor({l.kernels});
            p.gamma.fill(1.0f);
            p.beta = Tensor({l.kernels});
            p.stats = BnStats<float>(l.kernels);
        }
        net.layers.push_back(std::move(p));
        in_ch = l.kernels;
    }
    const int K = spec.feature_count();
    net.classifier_weights = Tensor({spec.num_classes, K});
    const double scale = std::sqrt(2.0 / double(K));
    for (auto& v : net.classifier_weights.data) v = float(rng.normal() * scale);
    net.classifier_bias = Tensor({spec.num_classes});
    return net;
}

struct ForwardCache {
    std::vector<Tensor> conv_inputs;   // input to each conv
    std::vector<Tensor> conv_outputs;  // pre-bn conv output
    std::vector<Tensor> bn_outputs;    // pre-relu
    std::vector<BnCache<float>> bn_caches;
    Tensor gap_input;  // post-activation feature maps
    Tensor gap_output;
};

struct ForwardResult {
    Tensor logits;        // [N,C]
    Tensor feature_maps;  // [N,K,u,v], post-activation
};

inline ForwardResult forward(Network& net, const Tensor& batch, Mode mode,
                             ForwardCache* cache = nullptr) {
    check(batch.ndim() == 4, "forward: expected NCHW batch");
    check(batch.dim(1) == net.spec.input_channels && batch.dim(2) == net.spec.input_h &&
              batch.dim(3) == net.spec.input_w,
          "forward: batch shape " + batch.shape_str() + " does not match spec input " +
              std::to_string(net.spec.input_channels) + "x" + std::to_string(net.spec.input_h) +
              "x" + std::to_string(net.spec.input_w));
    Tensor x = batch;
    for (size_t i = 0; i < net.layers.size(); ++i) {
        const auto& ls = net.spec.layers[i];
        auto& lp = net.layers[i];
        if (cache) cache->conv_inputs.push_back(x);
        Tensor y = conv2d_forward(x, lp.kernels, lp.bias, ls.stride,
                                  NetworkSpec::same_padding(ls.ksize));
        if (cache) cache->conv_outputs.push_back(y);
        if (ls.batchnorm) {
            BnCache<float> bc;
            y = batchnorm_forward(y, lp.gamma, lp.beta, lp.stats, mode, 1e-5f,
                                  cache ? &bc : nullptr);
            if (cache) cache->bn_caches.push_back(std::move(bc));
        } else if (cache) {
            cache->bn_caches.emplace_back();
        }
        if (cache) cache->bn_outputs.push_back(y);
        if (ls.relu) y = relu_forward(y);
        x = std::move(y);
    }
    ForwardResult res;
    res.feature_maps = x;
    if (cache) cache->gap_input = x;
    Tensor pooled = gap_forward(x);
    if (cache) cache->gap_output = pooled;
    res.logits = dense_forward(pooled, net.classifier_weights, net.classifier_bias);
    return res;
}

struct TrainConfig {
    int epochs = 10;
    int batch_size = 32;
    OptimizerState optimizer;
    uint64_t seed = 1;
    bool augment = false;  // honored by callers that own raw images
};

struct EpochLog {
    int epoch;
    float lr;
    float loss;
    float accuracy;
};

namespace detail {

// Backward through the whole stack; applies one optimizer step.
inline float train_step(Network& net, const Tensor& batch, const std::vector<int>& labels,
                        OptimizerState& opt, float lr, int* correct_out) {
    ForwardCache cache;
    ForwardResult res = forward(net, batch, Mode::Train, &cache);
    auto [loss, grad_logits] = softmax_cross_entropy(res.logits, labels);
    if (correct_out) {
        for (int n = 0; n < res.logits.dim(0); ++n) {
            int arg = 0;
            for (int c = 1; c < res.logits.dim(1); ++c)
                if (res.logits.at2(n, c) > res.logits.at2(n, arg)) arg = c;
            if (arg == labels[static_cast<size_t>(n)]) ++(*correct_out);
        }
    }

    DenseGrads<float> dg = dense_backward(grad_logits, cache.gap_output, net.classifier_weights);
    Tensor grad = gap_backward(dg.input, cache.gap_input.shape);

    const int L = static_cast<int>(net.layers.size());
    std::vector<ConvGrads<float>> conv_grads(static_cast<size_t>(L));
    std::vector<BnGrads<float>> bn_grads(static_cast<size_t>(L));
    for (int i = L - 1; i >= 0; --i) {
        const auto& ls = net.spec.layers[static_cast<size_t>(i)];
        auto& lp = net.layers[static_cast<size_t>(i)];
        if (ls.relu) grad = relu_backward(grad, cache.bn_outputs[static_cast<size_t>(i)]);
        if (ls.batchnorm) {
            bn_grads[static_cast<size_t>(i)] =
                batchnorm_backward(grad, lp.gamma, cache.bn_caches[static_cast<size_t>(i)]);
            grad = std::move(bn_grads[static_cast<size_t>(i)].input);
        }
        conv_grads[static_cast<size_t>(i)] =
            conv2d_backward(grad, cache.conv_inputs[static_cast<size_t>(i)], lp.kernels,
                            ls.stride, NetworkSpec::same_padding(ls.ksize));
        grad = std::move(conv_grads[static_cast<size_t>(i)].input);
    }

    std::vector<Tensor*> params;
    std::vector<const Tensor*> grads;
    std::vector<bool> decay;
    for (int i = 0; i < L; ++i) {
        auto& lp = net.layers[static_cast<size_t>(i)];
        auto& cg = conv_grads[static_cast<size_t>(i)];
        params.push_back(&lp.kernels); grads.push_back(&cg.kernels); decay.push_back(true);
        params.push_back(&lp.bias); grads.push_back(&cg.bias); decay.push_back(false);
        if (net.spec.layers[static_cast<size_t>(i)].batchnorm) {
            auto& bg = bn_grads[static_cast<size_t>(i)];
            params.push_back(&lp.gamma); grads.push_back(&bg.gamma); decay.push_back(false);
            params.push_back(&lp.beta); grads.push_back(&bg.beta); decay.push_back(false);
        }
    }
    params.push_back(&net.classifier_weights); grads.push_back(&dg.weights); decay.push_back(true);
    params.push_back(&net.classifier_bias); grads.push_back(&dg.bias); decay.push_back(false);
    sgd_momentum_step(params, grads, opt, lr, decay);
    return loss;
}

}  // namespace detail

// images are [C,H,W] tensors matching the spec input size.
inline std::vector<EpochLog> train(Network& net, const std::vector<Tensor>& images,
                                   const std::vector<int>& labels, TrainConfig& config) {
    check(!images.empty(), "train: dataset is empty");
    check(images.size() == labels.size(), "train: one label per image");
    check(config.epochs >= 1, "train: epochs must be at least 1");
    check(config.batch_size >= 2, "train: batch size must be at least 2 (batch norm)");
    for (int l : labels) check(l >= 0 && l < net.spec.num_classes, "train: label out of range");
    config.optimizer.validate();

    const int n_total = static_cast<int>(images.size());
    const int C = net.spec.input_channels, H = net.spec.input_h, W = net.spec.input_w;
    std::vector<EpochLog> log;
    std::vector<int> order(static_cast<size_t>(n_total));
    for (int i = 0; i < n_total; ++i) order[static_cast<size_t>(i)] = i;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        Rng shuffle_rng(config.seed * 0x9e3779b9ULL + static_cast<uint64_t>(epoch) + 1);
        for (int i = n_total - 1; i > 0; --i)
            std::swap(order[static_cast<size_t>(i)],
                      order[static_cast<size_t>(shuffle_rng.below(static_cast<uint64_t>(i + 1)))]);

        const float lr = lr_at_epoch(config.optimizer, epoch);
        double loss_sum = 0;
        int correct = 0, batches = 0;
        for (int start = 0; start + 2 <= n_total; start += config.batch_size) {
            const int bs = std::min(config.batch_size, n_total - start);
            if (bs < 2) break;  // batch norm needs 2+
            Tensor batch({bs, C, H, W});
            std::vector<int> batch_labels(static_cast<size_t>(bs));
            for (int b = 0; b < bs; ++b) {
                const int idx = order[static_cast<size_t>(start + b)];
                const Tensor& img = images[static_cast<size_t>(idx)];
                check(img.shape == std::vector<int>({C, H, W}),
                      "train: image shape " + img.shape_str() + " does not match spec");
                std::memcpy(&batch.at4(b, 0, 0, 0), img.data.data(), img.data.size() * sizeof(float));
                batch_labels[static_cast<size_t>(b)] = labels[static_cast<size_t>(idx)];
            }
            loss_sum += detail::train_step(net, batch, batch_labels, config.optimizer, lr, &correct);
            ++batches;
        }
        log.push_back({epoch, lr, float(loss_sum / std::max(batches, 1)),
                       float(correct) / float(n_total)});
    }
    return log;
}

// ---- model file io ----

enum class ModelIoCode { BadMagic, BadVersion, Truncated, ShapeMismatch, OpenFailed };

class ModelIoError : public std::runtime_error {
public:
    ModelIoError(ModelIoCode code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
    ModelIoCode code() const { return code_; }

private:
    ModelIoCode code_;
};

namespace detail {

constexpr char kModelMagic[8] = {'C', 'A', 'M', 'L', 'O', 'C', 'M', '1'};
constexpr uint32_t kModelVersion = 1;

inline void put_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<char*>(b), 4);
}

inline uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4))
        throw ModelIoError(ModelIoCode::Truncated, "model file: truncated while reading u32");
    return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 | uint32_t(b[3]) << 24;
}

inline void named_tensors(Network& net, std::vector<std::pair<std::string, Tensor*>>& out) {
    for (size_t i = 0; i < net.layers.size(); ++i) {
        const std::string p = "layer" + std::to_string(i) + ".";
        auto& lp = net.layers[i];
        out.emplace_back(p + "kernels", &lp.kernels);
        out.emplace_back(p + "bias", &lp.bias);
        if (net.spec.layers[i].batchnorm) {
            out.emplace_back(p + "gamma", &lp.gamma);
            out.emplace_back(p + "beta", &lp.beta);
            out.emplace_back(p + "running_mean", &lp.stats.running_mean);
            out.emplace_back(p + "running_var", &lp.stats.running_var);
        }
    }
    out.emplace_back("classifier.weights", &net.classifier_weights);
    out.emplace_back("classifier.bias", &net.classifier_bias);
}

}  // namespace detail

inline void save(Network& net, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ModelIoError(ModelIoCode::OpenFailed, "model save: cannot open " + path);
    os.write(detail::kModelMagic, 8);
    detail::put_u32(os, detail::kModelVersion);
    const std::string spec_text = net.spec.to_text();
    detail::put_u32(os, static_cast<uint32_t>(spec_text.size()));
    os.write(spec_text.data(), static_cast<std::streamsize>(spec_text.size()));

    std::vector<std::pair<std::string, Tensor*>> tensors;
    detail::named_tensors(net, tensors);
    detail::put_u32(os, static_cast<uint32_t>(tensors.size()));
    for (auto& [name, t] : tensors) {
        detail::put_u32(os, static_cast<uint32_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        detail::put_u32(os, static_cast<uint32_t>(t->ndim()));
        for (int d : t->shape) detail::put_u32(os, static_cast<uint32_t>(d));
    }
    for (auto& [name, t] : tensors) {
        static_assert(sizeof(float) == 4);
        os.write(reinterpret_cast<const char*>(t->data.data()),
                 static_cast<std::streamsize>(t->data.size() * 4));
    }
    if (!os) throw ModelIoError(ModelIoCode::OpenFailed, "model save: write failed for " + path);
}

inline Network load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ModelIoError(ModelIoCode::OpenFailed, "model load: cannot open " + path);
    char magic[8];
    if (!is.read(magic, 8))
        throw ModelIoError(ModelIoCode::Truncated, "model load: file shorter than header");
    if (std::memcmp(magic, detail::kModelMagic, 8) != 0)
        throw ModelIoError(ModelIoCode::BadMagic, "model load: bad magic in " + path);
    const uint32_t version = detail::get_u32(is);
    if (version != detail::kModelVersion)
        throw ModelIoError(ModelIoCode::BadVersion,
                           "model load: unsupported version " + std::to_string(version));
    const uint32_t spec_len = detail::get_u32(is);
    std::string spec_text(spec_len, '\0');
    if (!is.read(spec_text.data(), spec_len))
        throw ModelIoError(ModelIoCode::Truncated, "model load: truncated spec block");

    Network net = build(NetworkSpec::from_text(spec_text), 0);
    std::vector<std::pair<std::string, Tensor*>> tensors;
    detail::named_tensors(net, tensors);

    const uint32_t count = detail::get_u32(is);
    if (count != tensors.size())
        throw ModelIoError(ModelIoCode::ShapeMismatch,
                           "model load: shape table has " + std::to_string(count) +
                               " tensors, spec implies " + std::to_string(tensors.size()));
    for (auto& [name, t] : tensors) {
        const uint32_t name_len = detail::get_u32(is);
        std::string stored(name_len, '\0');
        if (!is.read(stored.data(), name_len))
            throw ModelIoError(ModelIoCode::Truncated, "model load: truncated tensor name");
        if (stored != name)
            throw ModelIoError(ModelIoCode::ShapeMismatch,
                               "model load: expected tensor " + name + ", found " + stored);
        const uint32_t ndim = detail::get_u32(is);
        std::vector<int> shape(ndim);
        for (uint32_t d = 0; d < ndim; ++d) shape[d] = static_cast<int>(detail::get_u32(is));
        if (shape != t->shape)
            throw ModelIoError(ModelIoCode::ShapeMismatch,
                               "model load: tensor " + name + " has inconsistent shape");
    }
    for (auto& [name, t] : tensors) {
        if (!is.read(reinterpret_cast<char*>(t->data.data()),
                     static_cast<std::streamsize>(t->data.size() * 4)))
            throw ModelIoError(ModelIoCode::Truncated, "model load: truncated payload at " + name);
    }
    return net;
}

}  // namespace camloc
