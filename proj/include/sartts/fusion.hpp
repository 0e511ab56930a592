#pragma once

#include <filesystem>
#include <utility>
#include <vector>

#include "sartts/numerics.hpp"
#include "sartts/prosody.hpp"
#include "sartts/retrieval.hpp"

namespace sartts {

struct PhonemeEmbedding {
    Matrix values;  // T_p x d_p

    std::size_t seq_len() const { return values.rows; }
    std::size_t dim() const { return values.cols; }
};

// Learned projections of the cross-attention block and the prosody path.
struct FusionParams {
    Matrix w_q;  // d_p x d_k
    Matrix w_k;  // d_t x d_k
    Matrix w_v;  // d_t x d_v
    Matrix w_w;  // d_w x d_v
};

struct LoraAdapter {
    Matrix w_base;  // d_in x d_out, frozen
    Matrix a;       // d_in x r
    Matrix b;       // r x d_out
    std::size_t rank = 1;
    double alpha = 1.0;
};

struct FusionOutput {
    Matrix h;     // T_p x d_v
    Matrix attn;  // T_p x T_t, rows sum to 1
    Matrix z;     // T_p x d_v
};

struct FusionInputs {
    PhonemeEmbedding e_p;
    SemanticEmbedding e_s;
    std::vector<ProsodyEmbedding> exemplars;
};

struct FusionGradients {
    Matrix e_p, e_s;
    Matrix w_q, w_k, w_v, w_w;
    Matrix a, b;
    Matrix w_base;  // exposed for inspection, never applied by training
};

// Q = E_p W_q, K = E_s W_k, V = E_s W_v, attn = softmax(QK^T/sqrt(d_k)),
// H = attn V. Returns (H, attn).
std::pair<Matrix, Matrix> cross_attention_forward(const PhonemeEmbedding& e_p,
                                                  const SemanticEmbedding& e_s,
                                                  const FusionParams& p);

// Z = H + broadcast of sum_k W_w^T e_k over rows. mean_exemplars divides the
// sum by the exemplar count.
Matrix prosody_condition(const Matrix& h, const std::vector<ProsodyEmbedding>& exemplars,
                         const Matrix& w_w, bool mean_exemplars = false);

// y = x (W_base + (alpha/rank) A B)
Matrix lora_forward(const Matrix& x, const LoraAdapter& adapter);

FusionOutput fusion_forward(const FusionInputs& in, const FusionParams& p,
                            bool mean_exemplars = false);

// Full toy pipeline: fusion_forward then lora_forward on Z.
Matrix pipeline_forward(const FusionInputs& in, const FusionParams& p, const LoraAdapter& adapter,
                        bool mean_exemplars = false);

double mse_loss(const Matrix& y, const Matrix& target);

// Analytic gradients of the mean-squared error between pipeline_forward
// output and `target`, with respect to every input and parameter.
FusionGradients fusion_backward(const FusionInputs& in, const FusionParams& p,
                                const LoraAdapter& adapter, const Matrix& target,
                                bool mean_exemplars = false);

// One plain gradient-descent step on {W_q, W_k, W_v, W_w, A, B}. W_base is
// never touched. Returns the loss before the update.
double train_step_toy(FusionParams& p, LoraAdapter& adapter, const FusionInputs& batch,
                      const Matrix& target, double learning_rate, bool mean_exemplars = false);

// Uniform init in [-1/sqrt(fan_in), 1/sqrt(fan_in)], seeded.
FusionParams init_fusion_params(std::size_t d_p, std::size_t d_t, std::size_t d_k,
                                std::size_t d_v, std::size_t d_w, std::uint64_t seed);

// A random, B zero, so the initial delta is exactly zero.
LoraAdapter init_lora(std::size_t d_in, std::size_t d_out, std::size_t rank, double alpha,
                      std::uint64_t seed);

// Directory layout: params.json listing each matrix's name and shape, plus
// one blob per matrix in the embedding-store format.
void save_fusion_params(const std::filesystem::path& dir, const FusionParams& p);
FusionParams load_fusion_params(const std::filesystem::path& dir);

}  // namespace sartts
