#include "sartts/fusion.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "sartts/embedding_store.hpp"
#include "sartts/errors.hpp"

namespace sartts {

namespace {

// Everything the backward pass needs from one forward evaluation.
struct Cache {
    Matrix q, k, v, scores, attn, h, z, y;
    Vector cond;  // pooled exemplar projection added to every row of H
    double inv_sqrt_dk = 1.0;
};

Vector exemplar_projection(const std::vector<ProsodyEmbedding>& exemplars, const Matrix& w_w,
                           bool mean_exemplars) {
    Vector cond(w_w.cols, 0.0);
    for (const auto& e : exemplars) {
        if (e.values.dim != w_w.rows)
            throw DimensionError("exemplar dim " + std::to_string(e.values.dim) +
                                 " != W_w rows " + std::to_string(w_w.rows));
        for (std::size_t j = 0; j < w_w.cols; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < w_w.rows; ++i) s += w_w.at(i, j) * e.values.data[i];
            cond.data[j] += s;
        }
    }
    if (mean_exemplars && !exemplars.empty())
        for (double& v : cond.data) v /= static_cast<double>(exemplars.size());
    return cond;
}

Cache run_forward(const FusionInputs& in, const FusionParams& p, const LoraAdapter& adapter,
                  bool mean_exemplars) {
    Cache c;
    c.q = matmul(in.e_p.values, p.w_q);
    c.k = matmul(in.e_s.values, p.w_k);
    c.v = matmul(in.e_s.values, p.w_v);
    c.inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(p.w_q.cols));
    c.scores = scale(matmul(c.q, transpose(c.k)), c.inv_sqrt_dk);
    c.attn = softmax_rows(c.scores);
    c.h = matmul(c.attn, c.v);
    c.cond = exemplar_projection(in.exemplars, p.w_w, mean_exemplars);
    c.z = c.h;
    for (std::size_t i = 0; i < c.z.rows; ++i)
        for (std::size_t j = 0; j < c.z.cols; ++j) c.z.at(i, j) += c.cond.data[j];
    c.y = lora_forward(c.z, adapter);
    return c;
}

Matrix effective_weight(const LoraAdapter& adapter) {
    if (adapter.rank == 0 || adapter.a.cols != adapter.rank || adapter.b.rows != adapter.rank ||
        adapter.a.rows != adapter.w_base.rows || adapter.b.cols != adapter.w_base.cols)
        throw DimensionError("LoRA adapter shapes inconsistent");
    const double s = adapter.alpha / static_cast<double>(adapter.rank);
    return add(adapter.w_base, scale(matmul(adapter.a, adapter.b), s));
}

Matrix uniform_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
    Matrix m(rows, cols);
    for (double& v : m.data) v = rng.uniform(-bound, bound);
    return m;
}

}  // namespace

std::pair<Matrix, Matrix> cross_attention_forward(const PhonemeEmbedding& e_p,
                                                  const SemanticEmbedding& e_s,
                                                  const FusionParams& p) {
    if (e_p.dim() != p.w_q.rows)
        throw DimensionError("phoneme dim != W_q rows");
    if (e_s.dim() != p.w_k.rows || e_s.dim() != p.w_v.rows)
        throw DimensionError("semantic dim != W_k/W_v rows");
    if (p.w_q.cols != p.w_k.cols)
        throw DimensionError("W_q and W_k must share the key dimension");

    const Matrix q = matmul(e_p.values, p.w_q);
    const Matrix k = matmul(e_s.values, p.w_k);
    const Matrix v = matmul(e_s.values, p.w_v);
    const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(p.w_q.cols));
    const Matrix attn = softmax_rows(scale(matmul(q, transpose(k)), inv_sqrt_dk));
    return {matmul(attn, v), attn};
}

Matrix prosody_condition(const Matrix& h, const std::vector<ProsodyEmbedding>& exemplars,
                         const Matrix& w_w, bool mean_exemplars) {
    if (w_w.cols != h.cols)
        throw DimensionError("W_w cols " + std::to_string(w_w.cols) + " != H cols " +
                             std::to_string(h.cols));
    const Vector cond = exemplar_projection(exemplars, w_w, mean_exemplars);
    Matrix z = h;
    for (std::size_t i = 0; i < z.rows; ++i)
        for (std::size_t j = 0; j < z.cols; ++j) z.at(i, j) += cond.data[j];
    return z;
}

Matrix lora_forward(const Matrix& x, const LoraAdapter& adapter) {
    if (x.cols != adapter.w_base.rows)
        throw DimensionError("lora_forward: input cols != d_in");
    return matmul(x, effective_weight(adapter));
}

FusionOutput fusion_forward(const FusionInputs& in, const FusionParams& p, bool mean_exemplars) {
    auto [h, attn] = cross_attention_forward(in.e_p, in.e_s, p);
    Matrix z = prosody_condition(h, in.exemplars, p.w_w, mean_exemplars);
    return {std::move(h), std::move(attn), std::move(z)};
}

Matrix pipeline_forward(const FusionInputs& in, const FusionParams& p, const LoraAdapter& adapter,
                        bool mean_exemplars) {
    return lora_forward(fusion_forward(in, p, mean_exemplars).z, adapter);
}

double mse_loss(const Matrix& y, const Matrix& target) {
    if (!y.same_shape(target)) throw DimensionError("mse_loss: shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < y.data.size(); ++i) {
        const double d = y.data[i] - target.data[i];
        s += d * d;
    }
    return s / static_cast<double>(y.data.size());
}

FusionGradients fusion_backward(const FusionInputs& in, const FusionParams& p,
                                const LoraAdapter& adapter, const Matrix& target,
                                bool mean_exemplars) {
    const Cache c = run_forward(in, p, adapter, mean_exemplars);
    if (!c.y.same_shape(target)) throw DimensionError("fusion_backward: target shape mismatch");

    const double lora_scale = adapter.alpha / static_cast<double>(adapter.rank);

    // dL/dY for L = mean squared error
    Matrix d_y(c.y.rows, c.y.cols);
    const double inv_n = 2.0 / static_cast<double>(c.y.data.size());
    for (std::size_t i = 0; i < d_y.data.size(); ++i)
        d_y.data[i] = inv_n * (c.y.data[i] - target.data[i]);

    const Matrix w_eff = effective_weight(adapter);
    const Matrix d_z = matmul(d_y, transpose(w_eff));
    const Matrix d_w_eff = matmul(transpose(c.z), d_y);  // also dW_base

    FusionGradients g;
    g.w_base = d_w_eff;
    g.a = scale(matmul(d_w_eff, transpose(adapter.b)), lora_scale);
    g.b = scale(matmul(transpose(adapter.a), d_w_eff), lora_scale);

    // prosody path: the broadcast add means dL/dcond is the column sum of dZ
    Vector d_cond(c.z.cols, 0.0);
    for (std::size_t i = 0; i < d_z.rows; ++i)
        for (std::size_t j = 0; j < d_z.cols; ++j) d_cond.data[j] += d_z.at(i, j);
    const double exemplar_scale =
        (mean_exemplars && !in.exemplars.empty()) ? 1.0 / static_cast<double>(in.exemplars.size())
                                                  : 1.0;
    g.w_w = Matrix(p.w_w.rows, p.w_w.cols);
    for (const auto& e : in.exemplars)
        for (std::size_t i = 0; i < p.w_w.rows; ++i)
            for (std::size_t j = 0; j < p.w_w.cols; ++j)
                g.w_w.at(i, j) += exemplar_scale * e.values.data[i] * d_cond.data[j];

    // attention path
    const Matrix d_h = d_z;
    const Matrix d_v = matmul(transpose(c.attn), d_h);
    const Matrix d_attn = matmul(d_h, transpose(c.v));

    // softmax backward, row-wise: dS = attn .* (dattn - rowdot(dattn, attn))
    Matrix d_scores(c.scores.rows, c.scores.cols);
    for (std::size_t i = 0; i < c.attn.rows; ++i) {
        double row_dot = 0.0;
        for (std::size_t j = 0; j < c.attn.cols; ++j)
            row_dot += d_attn.at(i, j) * c.attn.at(i, j);
        for (std::size_t j = 0; j < c.attn.cols; ++j)
            d_scores.at(i, j) = c.attn.at(i, j) * (d_attn.at(i, j) - row_dot);
    }

    const Matrix d_q = scale(matmul(d_scores, c.k), c.inv_sqrt_dk);
    const Matrix d_k = scale(matmul(transpose(d_scores), c.q), c.inv_sqrt_dk);

    g.w_q = matmul(transpose(in.e_p.values), d_q);
    g.w_k = matmul(transpose(in.e_s.values), d_k);
    g.w_v = matmul(transpose(in.e_s.values), d_v);
    g.e_p = matmul(d_q, transpose(p.w_q));
    g.e_s = add(matmul(d_k, transpose(p.w_k)), matmul(d_v, transpose(p.w_v)));
    return g;
}

double train_step_toy(FusionParams& p, LoraAdapter& adapter, const FusionInputs& batch,
                      const Matrix& target, double learning_rate, bool mean_exemplars) {
    if (learning_rate <= 0.0) throw ParameterError("learning_rate must be positive");
    const double loss = mse_loss(pipeline_forward(batch, p, adapter, mean_exemplars), target);
    const FusionGradients g = fusion_backward(batch, p, adapter, target, mean_exemplars);

    const auto apply = [learning_rate](Matrix& w, const Matrix& grad) {
        for (std::size_t i = 0; i < w.data.size(); ++i) w.data[i] -= learning_rate * grad.data[i];
    };
    apply(p.w_q, g.w_q);
    apply(p.w_k, g.w_k);
    apply(p.w_v, g.w_v);
    apply(p.w_w, g.w_w);
    apply(adapter.a, g.a);
    apply(adapter.b, g.b);
    return loss;
}

FusionParams init_fusion_params(std::size_t d_p, std::size_t d_t, std::size_t d_k,
                                std::size_t d_v, std::size_t d_w, std::uint64_t seed) {
    Rng rng(seed);
    FusionParams p;
    p.w_q = uniform_matrix(d_p, d_k, rng);
    p.w_k = uniform_matrix(d_t, d_k, rng);
    p.w_v = uniform_matrix(d_t, d_v, rng);
    p.w_w = uniform_matrix(d_w, d_v, rng);
    return p;
}

LoraAdapter init_lora(std::size_t d_in, std::size_t d_out, std::size_t rank, double alpha,
                      std::uint64_t seed) {
    if (rank == 0 || rank > std::min(d_in, d_out))
        throw ParameterError("LoRA rank must satisfy 1 <= r <= min(d_in, d_out)");
    Rng rng(seed);
    LoraAdapter ad;
    ad.w_base = uniform_matrix(d_in, d_out, rng);
    ad.a = uniform_matrix(d_in, rank, rng);
    ad.b = Matrix(rank, d_out, 0.0);
    ad.rank = rank;
    ad.alpha = alpha;
    return ad;
}

void save_fusion_params(const std::filesystem::path& dir, const FusionParams& p) {
    std::filesystem::create_directories(dir);
    const std::pair<const char*, const Matrix*> mats[] = {
        {"w_q", &p.w_q}, {"w_k", &p.w_k}, {"w_v", &p.w_v}, {"w_w", &p.w_w}};
    nlohmann::json manifest;
    auto& list = manifest["matrices"] = nlohmann::json::array();
    for (const auto& [name, m] : mats) {
        const std::string file = std::string(name) + ".semb";
        write_blob(dir / file, *m);
        list.push_back({{"name", name}, {"rows", m->rows}, {"cols", m->cols}, {"file", file}});
    }
    std::ofstream out(dir / "params.json", std::ios::trunc);
    if (!out) throw IoError("cannot write " + (dir / "params.json").string());
    out << manifest.dump(2) << "\n";
}

FusionParams load_fusion_params(const std::filesystem::path& dir) {
    std::ifstream in(dir / "params.json");
    if (!in) throw IoError("cannot open " + (dir / "params.json").string());
    nlohmann::json manifest;
    try {
        in >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("params.json: " + std::string(e.what()));
    }

    FusionParams p;
    bool seen[4] = {};
    try {
        for (const auto& entry : manifest.at("matrices")) {
            const auto name = entry.at("name").get<std::string>();
            Matrix m = read_blob(dir / entry.at("file").get<std::string>());
            if (m.rows != entry.at("rows").get<std::size_t>() ||
                m.cols != entry.at("cols").get<std::size_t>())
                throw FormatError("matrix '" + name + "' shape does not match its manifest entry");
            if (name == "w_q") p.w_q = std::move(m), seen[0] = true;
            else if (name == "w_k") p.w_k = std::move(m), seen[1] = true;
            else if (name == "w_v") p.w_v = std::move(m), seen[2] = true;
            else if (name == "w_w") p.w_w = std::move(m), seen[3] = true;
            else throw FormatError("unknown matrix name '" + name + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("params.json: " + std::string(e.what()));
    }
    if (!(seen[0] && seen[1] && seen[2] && seen[3]))
        throw FormatError("params.json must list w_q, w_k, w_v, w_w");
    return p;
}

}  // namespace sartts
