#pragma once

#include <string>
#include <vector>

#include "mimolab/numerics.hpp"

namespace mimolab::nn {

enum class Activation { kRelu, kLinear, kSoftmax };

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& s);

struct Layer {
    Mat w;  // out x in
    std::vector<double> b;
    Activation act = Activation::kLinear;
    int in() const { return w.cols; }
    int out() const { return w.rows; }
};

// Fully connected network. Layer widths chain and softmax may only appear
// as the final activation (validated on construction).
struct Mlp {
    std::vector<Layer> layers;
    int input_width() const { return layers.front().in(); }
    int output_width() const { return layers.back().out(); }
    size_t parameter_count() const;
    void validate() const;
};

// Hidden layers use `hidden_act`; init is Kaiming-uniform (fan-in) for ReLU
// layers and Glorot-uniform otherwise, biases zero.
Mlp make_mlp(int in, const std::vector<int>& hidden, int out,
             Activation hidden_act, Activation out_act, RngStream& rng);

// 1-based message index -> standard basis vector of length `cardinality`.
std::vector<double> one_hot(int m, int cardinality);

// Per-layer activations kept for the backward pass. Buffers are reused
// across calls to avoid allocation churn in training loops.
struct Trace {
    const Mat* input = nullptr;
    std::vector<Mat> pre;   // pre-activation per layer
    std::vector<Mat> post;  // post-activation per layer
};

Mat forward(const Mlp& net, const Mat& x);
// Returns a reference to trace.post.back().
const Mat& forward(const Mlp& net, const Mat& x, Trace& trace);

struct Grads {
    std::vector<Mat> dw;
    std::vector<std::vector<double>> db;
    void zero();
};
Grads make_grads(const Mlp& net);

// Reverse pass. `dout` is the loss gradient w.r.t. the network output for
// linear/ReLU-ended nets; for softmax-ended nets it must already be the
// logit-space gradient (use cross_entropy_logit_grad). Gradients are added
// into `grads` when accumulate is true. If dx is non-null it receives the
// gradient w.r.t. the input batch.
void backward(const Mlp& net, const Trace& trace, const Mat& dout,
              Grads& grads, Mat* dx, bool accumulate = false);

// Batch-mean categorical cross-entropy -1/B sum log q[label]; probabilities
// are clamped below at 1e-12 before the log. labels are 0-based.
double cross_entropy(const Mat& probs, const std::vector<int>& labels);
// weight * d(mean CE)/d(logits) = weight * (q - onehot) / B, the fused
// softmax+CE gradient.
Mat cross_entropy_logit_grad(const Mat& probs, const std::vector<int>& labels,
                             double weight = 1.0);

// Convenience wrapper: forward + CE + full backward for a softmax net.
double ce_backward(const Mlp& net, const Mat& x,
                   const std::vector<int>& labels, Grads& grads);

struct Adam {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long long t = 0;
    std::vector<Mat> mw, vw;
    std::vector<std::vector<double>> mb, vb;

    Adam() = default;
    Adam(const Mlp& net, double learning_rate);
    void step(Mlp& net, const Grads& grads);
};

// Common scale applied by the average-power constraint and what it was
// computed from (the unscaled candidate energy sum).
struct NormScale {
    double scale = 1.0;
    double sum_sq = 0.0;
};

// Scales all M candidate rows by the common factor that makes the mean row
// energy (1/M) sum ||x_i||^2 equal target_total = N_B * P_T. Throws if all
// candidates are zero.
NormScale normalize_avg_power(Mat& candidates, double n_b, double p_t);

// Gradient through normalize_avg_power when batch row k used candidate
// rows_used[k]: returns the M x D gradient w.r.t. the unscaled candidates.
// `grads` is dL/d(scaled batch rows); `scaled` is the normalized candidate
// matrix; `ns` the value returned by the forward call.
Mat avg_power_norm_backward(const Mat& grads, const std::vector<int>& rows_used,
                            const Mat& scaled, const NormScale& ns);

// Conditional variant: consecutive groups of `group` batch rows are the
// full candidate set for one channel realization and are normalized
// independently so E{||x||^2 | H} = p_t within each group.
std::vector<NormScale> normalize_conditional_power(Mat& batch, int group,
                                                   double p_t);
Mat conditional_power_norm_backward(const Mat& grads, const Mat& scaled,
                                    int group,
                                    const std::vector<NormScale>& ns);

// Model container persisted to disk: named nets plus a scenario tag and the
// training seed. Text header, then raw little-endian f64 weight/bias blocks
// in layer order (w row-major, then b); byte layout documented in README.
struct NamedMlp {
    std::string name;
    Mlp net;
};

void save_models(const std::string& path, const std::string& scenario,
                 uint64_t seed, const std::vector<NamedMlp>& nets);
std::vector<NamedMlp> load_models(const std::string& path,
                                  std::string* scenario = nullptr,
                                  uint64_t* seed = nullptr);

}  // namespace mimolab::nn
