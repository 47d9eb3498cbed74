#include "rcfm/consensus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "rcfm/clustering.hpp"
#include "rcfm/random.hpp"

namespace rcfm {

std::string to_string(BaseMethod m) {
    switch (m) {
        case BaseMethod::kmeans: return "kmeans";
        case BaseMethod::pam: return "pam";
        case BaseMethod::fuzzy_cmeans: return "fuzzy_cmeans";
    }
    return "?";
}

BaseMethod base_method_from_string(const std::string& name) {
    if (name == "kmeans") return BaseMethod::kmeans;
    if (name == "pam") return BaseMethod::pam;
    if (name == "fuzzy_cmeans") return BaseMethod::fuzzy_cmeans;
    throw std::invalid_argument("unknown base method '" + name + "'");
}

MlnArchitecture EnsembleConfig::arch_for(std::size_t input_dim) const {
    MlnArchitecture arch;
    arch.layer_sizes.push_back(static_cast<int>(input_dim));
    if (trainer.hidden_sizes.empty()) {
        arch.layer_sizes.push_back(std::max(4, 2 * k));
    } else {
        for (int h : trainer.hidden_sizes) arch.layer_sizes.push_back(h);
    }
    arch.layer_sizes.push_back(k);
    return arch;
}

void EnsembleConfig::validate() const {
    if (methods.empty()) throw std::invalid_argument("ensemble: no base methods");
    if (k < 1) throw std::invalid_argument("ensemble: k must be at least 1");
    if (seeds.empty()) throw std::invalid_argument("ensemble: no seeds");
    if (trainer.lr <= 0.0) throw std::invalid_argument("ensemble: learning rate must be positive");
    if (trainer.epochs < 0) throw std::invalid_argument("ensemble: negative epoch count");
    if (maintenance) maintenance->soft.validate();
}

namespace {

/// Hardening can leave an output cluster empty; move the best-fitting point
/// of an over-full cluster into each empty one so the partition keeps
/// exactly k clusters.
Partition harden_full(const FuzzyPartition& fp) {
    Partition p = harden(fp);
    std::vector<std::size_t> counts(static_cast<std::size_t>(p.k), 0);
    for (int a : p.assignment) ++counts[static_cast<std::size_t>(a)];
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] > 0) continue;
        std::size_t best = p.size();
        double best_u = -1.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (counts[static_cast<std::size_t>(p.assignment[i])] < 2) continue;
            const double u = fp.memberships(c, i);
            if (u > best_u) {
                best_u = u;
                best = i;
            }
        }
        if (best == p.size()) throw std::runtime_error("harden: cannot fill empty cluster");
        --counts[static_cast<std::size_t>(p.assignment[best])];
        p.assignment[best] = static_cast<int>(c);
        ++counts[c];
    }
    return p;
}

template <typename F>
auto run_stage(const char* stage, F&& f) {
    try {
        return f();
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string(stage) + ": " + e.what());
    }
}

MlnModel model_from(const MlnArchitecture& arch, const WeightSet& ws) {
    MlnModel model;
    model.arch = arch;
    model.weights = ws.weights;
    model.biases = ws.biases;
    model.validate();
    return model;
}

}  // namespace

std::vector<Partition> generate_base_partitions(const Dataset& data, const EnsembleConfig& cfg) {
    cfg.validate();
    data.validate();
    if (data.size() < static_cast<std::size_t>(cfg.k))
        throw std::invalid_argument("ensemble: k exceeds dataset size");
    std::vector<Partition> parts;
    parts.reserve(cfg.methods.size() * cfg.seeds.size());
    for (BaseMethod method : cfg.methods) {
        for (std::uint64_t seed : cfg.seeds) {
            switch (method) {
                case BaseMethod::kmeans:
                    parts.push_back(kmeans(data, cfg.k, seed, cfg.cluster_max_iter, cfg.cluster_tol));
                    break;
                case BaseMethod::pam:
                    parts.push_back(pam(data, cfg.k, seed, cfg.cluster_max_iter));
                    break;
                case BaseMethod::fuzzy_cmeans:
                    parts.push_back(harden_full(fuzzy_cmeans(data, cfg.k, cfg.fcm_m, cfg.fcm_tol,
                                                             seed, cfg.cluster_max_iter * 3)));
                    break;
            }
            parts.back().validate();
        }
    }
    return parts;
}

std::vector<Partition> align_ensemble(const std::vector<Partition>& partitions) {
    if (partitions.empty()) throw std::invalid_argument("align_ensemble: empty ensemble");
    const Partition& ref = partitions.front();
    std::vector<Partition> aligned;
    aligned.reserve(partitions.size());
    aligned.push_back(ref);
    for (std::size_t i = 1; i < partitions.size(); ++i) {
        if (partitions[i].k != ref.k)
            throw std::invalid_argument("align_ensemble: inconsistent cluster counts");
        aligned.push_back(align_labels(partitions[i], ref));
    }
    return aligned;
}

Matrix encode_targets(const Partition& p, int k) {
    if (k < 1) throw std::invalid_argument("encode_targets: k must be at least 1");
    Matrix t(p.size(), static_cast<std::size_t>(k), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        const int label = p.assignment[i];
        if (label < 0 || label >= k)
            throw std::invalid_argument("encode_targets: label " + std::to_string(label) +
                                        " outside [0," + std::to_string(k) + ")");
        t(i, static_cast<std::size_t>(label)) = 1.0;
    }
    return t;
}

namespace {

WeightSet train_with_history(const Dataset& data, const Partition& p, const EnsembleConfig& cfg,
                             std::uint64_t seed, std::vector<double>* history) {
    const MlnArchitecture arch = cfg.arch_for(data.dim());
    const MlnModel initial = init_model(arch, seed);
    const TrainResult trained =
        train_gd(initial, data.points, encode_targets(p, cfg.k), cfg.trainer.lr, cfg.trainer.epochs);
    if (history) *history = trained.history;
    WeightSet ws;
    ws.weights = trained.model.weights;
    ws.biases = trained.model.biases;
    return ws;
}

}  // namespace

WeightSet train_per_partition(const Dataset& data, const Partition& p, const EnsembleConfig& cfg,
                              std::uint64_t seed) {
    return train_with_history(data, p, cfg, seed, nullptr);
}

WeightSet combine_weights(const std::vector<WeightSet>& sets) {
    if (sets.empty()) throw std::invalid_argument("combine_weights: empty list");
    const WeightSet& first = sets.front();
    for (const WeightSet& s : sets) {
        if (s.weights.size() != first.weights.size() || s.biases.size() != first.biases.size())
            throw std::invalid_argument("combine_weights: layer count mismatch");
        for (std::size_t l = 0; l < s.weights.size(); ++l)
            if (!s.weights[l].same_shape(first.weights[l]) ||
                s.biases[l].size() != first.biases[l].size())
                throw std::invalid_argument("combine_weights: shape mismatch");
    }

    // mean computed as first + mean(deviations) so that identical inputs
    // reproduce themselves exactly
    const double n = static_cast<double>(sets.size());
    WeightSet out;
    out.partition_index = -1;
    for (std::size_t l = 0; l < first.weights.size(); ++l) {
        Matrix w = first.weights[l];
        for (std::size_t i = 0; i < w.data().size(); ++i) {
            double dev = 0.0;
            for (const WeightSet& s : sets) dev += s.weights[l].data()[i] - w.data()[i];
            w.data()[i] += dev / n;
        }
        std::vector<double> b = first.biases[l];
        for (std::size_t i = 0; i < b.size(); ++i) {
            double dev = 0.0;
            for (const WeightSet& s : sets) dev += s.biases[l][i] - b[i];
            b[i] += dev / n;
        }
        out.weights.push_back(std::move(w));
        out.biases.push_back(std::move(b));
    }
    return out;
}

Partition finalize(const Dataset& data, const MlnArchitecture& arch, const WeightSet& wf,
                   std::vector<int>* label_map) {
    const Matrix y = forward(model_from(arch, wf), data.points);
    const std::size_t k = y.cols();
    std::vector<int> raw(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < k; ++j)
            if (y(i, j) > y(i, best)) best = j;
        raw[i] = static_cast<int>(best);
    }

    // compact labels to a dense range, keeping unit order
    std::vector<char> used(k, 0);
    for (int a : raw) used[static_cast<std::size_t>(a)] = 1;
    std::vector<int> map(k, -1);
    int next = 0;
    for (std::size_t j = 0; j < k; ++j)
        if (used[j]) map[j] = next++;
    if (label_map) *label_map = map;

    Partition out;
    out.k = next;
    out.assignment.resize(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i)
        out.assignment[i] = map[static_cast<std::size_t>(raw[i])];
    out.validate();
    return out;
}

namespace {

std::uint64_t partition_trainer_seed(const EnsembleConfig& cfg, const Partition& p,
                                     std::size_t index) {
    (void)index;
    // keyed by partition content: identical base partitions train identical
    // networks, so a unanimous ensemble averages to exactly one network
    std::uint64_t h = cfg.trainer.train_seed;
    h = derive_seed(h, static_cast<std::uint64_t>(p.k));
    for (int a : p.assignment) h = derive_seed(h, static_cast<std::uint64_t>(a) + 1);
    return h;
}

RcfmResult mlncf_impl(const Dataset& data, const EnsembleConfig& cfg) {
    RcfmResult result;
    const std::vector<Partition> raw = run_stage(
        "mlncf[base_partitions]", [&] { return generate_base_partitions(data, cfg); });
    result.base_partitions =
        run_stage("mlncf[align]", [&] { return align_ensemble(raw); });

    std::vector<WeightSet> sets;
    sets.reserve(result.base_partitions.size());
    run_stage("mlncf[train]", [&] {
        for (std::size_t i = 0; i < result.base_partitions.size(); ++i) {
            const Partition& p = result.base_partitions[i];
            const std::uint64_t seed = partition_trainer_seed(cfg, p, i);
            std::vector<double> history;
            WeightSet ws = train_with_history(data, p, cfg, seed, &history);
            ws.partition_index = static_cast<int>(i);
            sets.push_back(std::move(ws));
            result.training_losses.push_back(std::move(history));
        }
        return 0;
    });
    result.combined_weights =
        run_stage("mlncf[combine]", [&] { return combine_weights(sets); });
    result.final = run_stage("mlncf[finalize]", [&] {
        return finalize(data, cfg.arch_for(data.dim()), result.combined_weights,
                        &result.finalize_label_map);
    });
    return result;
}

}  // namespace

RcfmResult mlncf(const Dataset& data, const EnsembleConfig& cfg) {
    cfg.validate();
    data.validate();
    return mlncf_impl(data, cfg);
}

RcfmResult rcfm(const Dataset& data, const EnsembleConfig& cfg) {
    cfg.validate();
    data.validate();
    if (!cfg.maintenance) throw std::invalid_argument("rcfm: maintenance settings required");

    MaintainedDataset maintained = run_stage("rcfm[maintain]", [&] {
        return maintain(data, cfg.maintenance->soft, cfg.maintenance->dedup_radius);
    });
    RcfmResult result = mlncf_impl(maintained.reduced, cfg);

    // cover removed points with the final label of their nearest kept row
    Partition full;
    full.k = result.final.k;
    full.assignment.assign(data.size(), -1);
    for (std::size_t r = 0; r < maintained.kept.size(); ++r)
        full.assignment[maintained.kept[r]] = result.final.assignment[r];
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (full.assignment[i] != -1) continue;
        std::size_t best = maintained.kept.front();
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t j : maintained.kept) {
            const double d = squared_distance(data.points.row(i), data.points.row(j));
            if (d < best_d) {
                best_d = d;
                best = j;
            }
        }
        full.assignment[i] = full.assignment[best];
    }
    full.validate();
    result.full = std::move(full);
    result.maintained = std::move(maintained);
    return result;
}

void write_labels_csv(const Dataset& data, const Partition& labels, const std::string& path) {
    if (labels.size() != data.size())
        throw std::invalid_argument("labels csv: partition does not cover the dataset");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("labels csv: cannot write '" + path + "'");
    out << "id,final_label\n";
    for (std::size_t i = 0; i < data.size(); ++i)
        out << data.ids[i] << ',' << labels.assignment[i] << '\n';
}

void write_manifest(const EnsembleConfig& cfg, const RcfmResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("manifest: cannot write '" + path + "'");
    char buf[64];
    auto fmt = [&buf](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    out << "kind = " << (cfg.maintenance ? "rcfm" : "mlncf") << "\n";
    out << "k = " << cfg.k << "\n";
    for (BaseMethod m : cfg.methods) out << "method = " << to_string(m) << "\n";
    for (std::uint64_t s : cfg.seeds) out << "seed = " << s << "\n";
    out << "trainer.lr = " << fmt(cfg.trainer.lr) << "\n";
    out << "trainer.epochs = " << cfg.trainer.epochs << "\n";
    out << "trainer.train_seed = " << cfg.trainer.train_seed << "\n";
    for (int h : cfg.trainer.hidden_sizes) out << "trainer.hidden = " << h << "\n";
    if (cfg.maintenance) {
        const SoftDbscanConfig& s = cfg.maintenance->soft;
        out << "maintain.eps = " << fmt(s.eps) << "\n";
        out << "maintain.min_pts = " << s.min_pts << "\n";
        out << "maintain.m = " << fmt(s.m) << "\n";
        out << "maintain.xi = " << fmt(s.xi) << "\n";
        out << "maintain.max_iter = " << s.max_iter << "\n";
        out << "maintain.exponent_mode = "
            << (s.exponent_mode == ExponentMode::standard ? "standard" : "alternate") << "\n";
        if (s.cov_reg) out << "maintain.cov_reg = " << fmt(*s.cov_reg) << "\n";
        out << "maintain.dedup_radius = " << fmt(cfg.maintenance->dedup_radius) << "\n";
    }
    if (result.maintained) {
        out << "maintained.kept = " << result.maintained->kept.size() << "\n";
        out << "maintained.removed_noisy = " << result.maintained->removed_noisy.size() << "\n";
        out << "maintained.removed_redundant = " << result.maintained->removed_redundant.size()
            << "\n";
    }
    out << "base_partitions = " << result.base_partitions.size() << "\n";
    for (std::size_t i = 0; i < result.training_losses.size(); ++i) {
        const auto& h = result.training_losses[i];
        out << "partition[" << i << "].initial_loss = " << fmt(h.front()) << "\n";
        out << "partition[" << i << "].final_loss = " << fmt(h.back()) << "\n";
    }
    out << "final.k = " << result.final.k << "\n";
    out << "finalize.label_map =";
    for (int m : result.finalize_label_map) out << ' ' << m;
    out << "\n";
}

}  // namespace rcfm
