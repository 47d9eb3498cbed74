#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rcfm/dataset.hpp"
#include "rcfm/mln.hpp"
#include "rcfm/soft_dbscan.hpp"

namespace rcfm {

enum class BaseMethod { kmeans, pam, fuzzy_cmeans };

std::string to_string(BaseMethod m);
BaseMethod base_method_from_string(const std::string& name);

struct TrainerConfig {
    double lr = 0.5;
    int epochs = 500;
    std::vector<int> hidden_sizes;   // empty means one hidden layer of max(4, 2k)
    std::uint64_t train_seed = 1;
};

struct MaintenanceConfig {
    SoftDbscanConfig soft;
    double dedup_radius = 0.0;
};

struct EnsembleConfig {
    std::vector<BaseMethod> methods;
    int k = 2;
    std::vector<std::uint64_t> seeds;
    TrainerConfig trainer;
    std::optional<MaintenanceConfig> maintenance;

    // base clusterer knobs
    int cluster_max_iter = 100;
    double cluster_tol = 1e-8;
    double fcm_m = 2.0;
    double fcm_tol = 1e-6;

    MlnArchitecture arch_for(std::size_t input_dim) const;
    void validate() const;
};

/// One trained network's parameters, tagged with its base-partition index.
struct WeightSet {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;
    int partition_index = -1;
};

struct RcfmResult {
    Partition final;                              // over the dataset the consensus stage saw
    std::vector<Partition> base_partitions;       // aligned
    std::optional<MaintainedDataset> maintained;
    WeightSet combined_weights;
    std::vector<std::vector<double>> training_losses;   // per base partition
    std::vector<int> finalize_label_map;          // raw output unit -> compact label, -1 if unused
    std::optional<Partition> full;                // all original points (maintenance runs only)
};

/// One partition per (method, seed) pair, methods outer, seeds inner; each
/// has exactly k clusters (fuzzy results hardened by argmax).
std::vector<Partition> generate_base_partitions(const Dataset& data, const EnsembleConfig& cfg);

/// Relabels every partition against partition 0.
std::vector<Partition> align_ensemble(const std::vector<Partition>& partitions);

/// One-hot rows: row i is 1 at p(i), 0 elsewhere.
Matrix encode_targets(const Partition& p, int k);

/// Trains a fresh seeded model on the one-hot encoding of p.
WeightSet train_per_partition(const Dataset& data, const Partition& p, const EnsembleConfig& cfg,
                              std::uint64_t seed);

/// Elementwise arithmetic mean of all weight matrices and bias vectors.
WeightSet combine_weights(const std::vector<WeightSet>& sets);

/// Classifies every point with the combined network, argmax per row (ties to
/// the lowest unit). Empty output units are compacted away; when label_map is
/// given it receives the unit -> compact-label mapping (-1 for unused units).
Partition finalize(const Dataset& data, const MlnArchitecture& arch, const WeightSet& wf,
                   std::vector<int>* label_map = nullptr);

/// Consensus without maintenance: base partitions, alignment, one network per
/// partition, weight averaging, finalization.
RcfmResult mlncf(const Dataset& data, const EnsembleConfig& cfg);

/// Maintenance followed by consensus on the reduced dataset. Removed points
/// are given the final label of their nearest kept neighbour so `full` covers
/// every original point.
RcfmResult rcfm(const Dataset& data, const EnsembleConfig& cfg);

/// id,final_label rows for the partition that covers the dataset.
void write_labels_csv(const Dataset& data, const Partition& labels, const std::string& path);

/// Plain-text run manifest: configuration, seeds, per-partition losses.
void write_manifest(const EnsembleConfig& cfg, const RcfmResult& result, const std::string& path);

}  // namespace rcfm
