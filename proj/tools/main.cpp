#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sartts/embedding_store.hpp"
#include "sartts/errors.hpp"
#include "sartts/eval.hpp"
#include "sartts/fusion.hpp"
#include "sartts/numerics.hpp"
#include "sartts/prosody.hpp"
#include "sartts/retrieval.hpp"

namespace {

using nlohmann::json;
using namespace sartts;

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

std::vector<Label> read_label_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<Label> labels;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty()) continue;
        labels.push_back(parse_label(line));
    }
    if (labels.empty()) throw ValidationError("no labels in " + path);
    return labels;
}

struct ProsodyOpts {
    std::size_t frame_len = 512;
    std::size_t hop = 160;
    double f0_min = 50.0;
    double f0_max = 500.0;
    double voicing_threshold = 0.3;
    std::size_t n_mels = 40;
    std::size_t n_ceps = 13;

    void attach(CLI::App* cmd) {
        cmd->add_option("--frame", frame_len, "Frame length in samples");
        cmd->add_option("--hop", hop, "Hop in samples");
        cmd->add_option("--f0-min", f0_min, "F0 search band lower bound (Hz)");
        cmd->add_option("--f0-max", f0_max, "F0 search band upper bound (Hz)");
        cmd->add_option("--voicing-threshold", voicing_threshold, "Autocorrelation voicing threshold");
        cmd->add_option("--n-mels", n_mels, "Mel filterbank size");
        cmd->add_option("--n-ceps", n_ceps, "Cepstral coefficients kept");
    }
};

json prosody_report_json(const ProsodyReport& rep) {
    json j;
    j["voiced_count"] = rep.voiced_count;
    if (rep.pitch_mean)
        j["pitch"] = {{"mean", *rep.pitch_mean}, {"std", *rep.pitch_std}};
    else
        j["pitch"] = nullptr;
    j["energy"] = {{"mean", rep.energy_mean}, {"std", rep.energy_std}};
    return j;
}

// Central finite differences over every parameter of the toy pipeline,
// compared against the analytic backward pass.
double grad_check_max_error(std::uint64_t seed, int trials) {
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        Rng rng(seed + static_cast<std::uint64_t>(t) * 7919);
        const std::size_t t_p = 1 + rng.below(4), t_t = 1 + rng.below(4);
        const std::size_t d_p = 1 + rng.below(8), d_t = 1 + rng.below(8);
        const std::size_t d_k = 1 + rng.below(8), d_v = 1 + rng.below(8);
        const std::size_t d_w = 1 + rng.below(4), d_out = 1 + rng.below(8);
        const std::size_t n_ex = rng.below(3);

        const auto rand_matrix = [&](std::size_t r, std::size_t c) {
            Matrix m(r, c);
            for (double& v : m.data) v = rng.uniform(-1.0, 1.0);
            return m;
        };

        FusionInputs in;
        in.e_p.values = rand_matrix(t_p, d_p);
        in.e_s.values = rand_matrix(t_t, d_t);
        for (std::size_t e = 0; e < n_ex; ++e) {
            Vector v(d_w);
            for (double& x : v.data) x = rng.uniform(-1.0, 1.0);
            in.exemplars.push_back({v});
        }
        FusionParams p{rand_matrix(d_p, d_k), rand_matrix(d_t, d_k), rand_matrix(d_t, d_v),
                       rand_matrix(d_w, d_v)};
        const std::size_t r = 1 + rng.below(std::min(d_v, d_out));
        LoraAdapter ad{rand_matrix(d_v, d_out), rand_matrix(d_v, r), rand_matrix(r, d_out), r, 1.5};
        const Matrix target = rand_matrix(t_p, d_out);

        const FusionGradients g = fusion_backward(in, p, ad, target);

        const auto loss = [&]() { return mse_loss(pipeline_forward(in, p, ad), target); };
        const double h = 1e-3;
        const auto check = [&](Matrix& param, const Matrix& grad) {
            for (std::size_t i = 0; i < param.data.size(); ++i) {
                const double orig = param.data[i];
                param.data[i] = orig + h;
                const double lp = loss();
                param.data[i] = orig - h;
                const double lm = loss();
                param.data[i] = orig;
                const double fd = (lp - lm) / (2.0 * h);
                const double denom = std::max({std::abs(fd), std::abs(grad.data[i]), 1e-8});
                worst = std::max(worst, std::abs(fd - grad.data[i]) / denom);
            }
        };
        check(in.e_p.values, g.e_p);
        check(in.e_s.values, g.e_s);
        check(p.w_q, g.w_q);
        check(p.w_k, g.w_k);
        check(p.w_v, g.w_v);
        check(p.w_w, g.w_w);
        check(ad.a, g.a);
        check(ad.b, g.b);
    }
    return worst;
}

int run(int argc, char** argv) {
    CLI::App app{"Retrieval-guided sarcastic speech synthesis toolkit"};
    app.require_subcommand(1);

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Validate external embedding files");
    std::string in_blob, in_manifest;
    ingest->add_option("--embeddings", in_blob, "Embedding blob")->required();
    ingest->add_option("--manifest", in_manifest, "Manifest file")->required();
    ingest->callback([&] {
        const ExemplarIndex idx = load_index(in_manifest, in_blob);
        emit({{"status", "ok"}, {"version", idx.version}, {"count", idx.records.size()},
              {"dim", idx.dim}});
    });

    // build-index
    auto* build = app.add_subcommand("build-index", "Build and persist an exemplar index");
    std::string b_manifest, b_blob, b_out_manifest, b_out_blob;
    build->add_option("--manifest", b_manifest)->required();
    build->add_option("--blob", b_blob)->required();
    build->add_option("--out-manifest", b_out_manifest)->required();
    build->add_option("--out-blob", b_out_blob)->required();
    build->callback([&] {
        const ExemplarIndex idx = load_index(b_manifest, b_blob);
        save_index(idx, b_out_manifest, b_out_blob);
        emit({{"status", "ok"}, {"count", idx.records.size()}, {"dim", idx.dim}});
    });

    // retrieve
    auto* retrieve = app.add_subcommand("retrieve", "Top-K cosine retrieval");
    std::string r_manifest, r_blob, r_query;
    std::size_t r_k = 0;
    retrieve->add_option("--index-manifest", r_manifest)->required();
    retrieve->add_option("--index-blob", r_blob)->required();
    retrieve->add_option("--query-blob", r_query, "Semantic embedding blob (T_t x d_t)")->required();
    retrieve->add_option("--k", r_k, "Number of exemplars to fetch")->required();
    retrieve->callback([&] {
        const ExemplarIndex idx = load_index(r_manifest, r_blob);
        const SemanticEmbedding query{read_blob(r_query)};
        const auto hits = top_k(idx, pool_query(query), r_k);
        json out;
        out["hits"] = json::array();
        for (const auto& h : hits)
            out["hits"].push_back({{"id", h.record_id}, {"score", h.score}, {"rank", h.rank}});
        emit(out);
    });

    // pool
    auto* pool = app.add_subcommand("pool", "Mean-pool a frame-feature blob to one row");
    std::string p_in, p_out;
    pool->add_option("--in", p_in)->required();
    pool->add_option("--out", p_out)->required();
    pool->callback([&] {
        const Matrix m = read_blob(p_in);
        const Vector v = mean_pool_rows(m);
        Matrix row(1, v.dim, v.data);
        write_blob(p_out, row);
        emit({{"status", "ok"}, {"rows", 1}, {"dim", v.dim}});
    });

    // fuse
    auto* fuse = app.add_subcommand("fuse", "Cross-attention + prosody conditioning forward pass");
    std::string f_phoneme, f_semantic, f_params, f_out;
    std::vector<std::string> f_exemplars;
    bool f_mean = false;
    fuse->add_option("--phoneme", f_phoneme, "Phoneme embedding blob (T_p x d_p)")->required();
    fuse->add_option("--semantic", f_semantic, "Semantic embedding blob (T_t x d_t)")->required();
    fuse->add_option("--exemplars", f_exemplars, "Exemplar feature blobs, pooled before projection");
    fuse->add_option("--params", f_params, "Parameter directory")->required();
    fuse->add_option("--out", f_out, "Output Z blob")->required();
    fuse->add_flag("--mean-exemplars", f_mean, "Average instead of summing exemplar projections");
    fuse->callback([&] {
        FusionInputs in;
        in.e_p.values = read_blob(f_phoneme);
        in.e_s.values = read_blob(f_semantic);
        for (const auto& path : f_exemplars)
            in.exemplars.push_back(pool_frames({read_blob(path)}));
        const FusionParams params = load_fusion_params(f_params);
        const FusionOutput out = fusion_forward(in, params, f_mean);
        write_blob(f_out, out.z);
        emit({{"status", "ok"}, {"rows", out.z.rows}, {"cols", out.z.cols},
              {"exemplars", in.exemplars.size()}});
    });

    // grad-check
    auto* grad = app.add_subcommand("grad-check", "Verify analytic gradients numerically");
    std::uint64_t g_seed = 1;
    int g_trials = 50;
    grad->add_option("--seed", g_seed)->required();
    grad->add_option("--trials", g_trials);
    grad->callback([&] {
        const double err = grad_check_max_error(g_seed, g_trials);
        emit({{"trials", g_trials}, {"seed", g_seed}, {"max_rel_error", err},
              {"pass", err < 1e-3}});
    });

    // extract-prosody
    auto* extract = app.add_subcommand("extract-prosody", "F0/energy/cepstra from a WAV file");
    std::string x_wav, x_prefix;
    ProsodyOpts x_opts;
    extract->add_option("--wav", x_wav)->required();
    extract->add_option("--out-prefix", x_prefix, "Prefix for output blobs")->required();
    x_opts.attach(extract);
    extract->callback([&] {
        const Waveform w = read_wav(x_wav);
        const FrameSpec spec{x_opts.frame_len, x_opts.hop};
        const FrameFeatures energy = frame_energy(w, spec);
        const F0Track f0 = estimate_f0(w, spec, x_opts.f0_min, x_opts.f0_max,
                                       x_opts.voicing_threshold);
        const FrameFeatures ceps = mel_cepstra(w, spec, x_opts.n_mels, x_opts.n_ceps);

        Matrix f0_mat(f0.frames.size(), 2);
        for (std::size_t i = 0; i < f0.frames.size(); ++i) {
            f0_mat.at(i, 0) = f0.frames[i].voiced ? 1.0 : 0.0;
            f0_mat.at(i, 1) = f0.frames[i].voiced ? f0.frames[i].f0 : 0.0;
        }
        write_blob(x_prefix + ".energy.semb", energy.values);
        write_blob(x_prefix + ".f0.semb", f0_mat);
        write_blob(x_prefix + ".ceps.semb", ceps.values);

        json out = prosody_report_json(prosody_stats(f0, energy));
        out["frames"] = energy.n_frames();
        out["sample_rate"] = w.sample_rate;
        emit(out);
    });

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Objective metrics");
    eval_cmd->require_subcommand(1);

    auto* eval_mcd = eval_cmd->add_subcommand("mcd", "Mel-cepstral distortion over DTW alignment");
    std::vector<std::string> m_ref, m_syn;
    bool m_include_c0 = false;
    eval_mcd->add_option("--ref", m_ref, "Reference cepstra blobs")->required();
    eval_mcd->add_option("--syn", m_syn, "Synthesized cepstra blobs")->required();
    eval_mcd->add_flag("--include-c0", m_include_c0, "Include c0 in the distance");
    eval_mcd->callback([&] {
        if (m_ref.size() != m_syn.size())
            throw ValidationError("--ref and --syn must list the same number of blobs");
        std::vector<double> values;
        for (std::size_t i = 0; i < m_ref.size(); ++i)
            values.push_back(mcd({read_blob(m_ref[i])}, {read_blob(m_syn[i])}, !m_include_c0));
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        double var = 0.0;
        for (double v : values) var += (v - mean) * (v - mean);
        const double sd = std::sqrt(var / static_cast<double>(values.size()));
        emit({{"mcd_db", {{"mean", mean}, {"std", sd}, {"count", values.size()}}}});
    });

    auto* eval_prosody = eval_cmd->add_subcommand("prosody", "Pitch/energy statistics of a WAV");
    std::string ep_wav;
    ProsodyOpts ep_opts;
    eval_prosody->add_option("--wav", ep_wav)->required();
    ep_opts.attach(eval_prosody);
    eval_prosody->callback([&] {
        const Waveform w = read_wav(ep_wav);
        const FrameSpec spec{ep_opts.frame_len, ep_opts.hop};
        const F0Track f0 = estimate_f0(w, spec, ep_opts.f0_min, ep_opts.f0_max,
                                       ep_opts.voicing_threshold);
        emit(prosody_report_json(prosody_stats(f0, frame_energy(w, spec))));
    });

    auto* eval_det = eval_cmd->add_subcommand("detection", "Precision/recall/weighted F1");
    std::string d_gold, d_pred;
    eval_det->add_option("--gold", d_gold, "Gold labels, one per line")->required();
    eval_det->add_option("--pred", d_pred, "Predicted labels, one per line")->required();
    eval_det->callback([&] {
        LabeledPredictions lp{read_label_file(d_gold), read_label_file(d_pred)};
        const MetricsReport rep = detection_metrics(lp);
        emit({{"detection", {{"precision", rep.precision}, {"recall", rep.recall},
                             {"weighted_f1", rep.weighted_f1}}}});
    });

    // split
    auto* split = app.add_subcommand("split", "Stratified 8:1:1 dataset split");
    std::string s_manifest, s_blob, s_prefix;
    std::uint64_t s_seed = 0;
    split->add_option("--manifest", s_manifest)->required();
    split->add_option("--blob", s_blob)->required();
    split->add_option("--seed", s_seed)->required();
    split->add_option("--out-prefix", s_prefix)->required();
    split->callback([&] {
        const ExemplarIndex idx = load_index(s_manifest, s_blob);
        const SplitResult parts = dataset_split(idx.records, s_seed);
        const std::pair<const char*, const std::vector<UtteranceRecord>*> outs[] = {
            {"train", &parts.train}, {"val", &parts.val}, {"test", &parts.test}};
        json counts;
        for (const auto& [name, recs] : outs) {
            counts[name] = recs->size();
            if (!recs->empty())
                save_index(build_index(*recs), s_prefix + "." + name + ".json",
                           s_prefix + "." + name + ".semb");
        }
        emit(counts);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints the usage message
        return 2;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const sartts::Error& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
