#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rcfm/consensus.hpp"
#include "rcfm/dataset.hpp"
#include "rcfm/speech.hpp"

namespace rcfm {

/// Seeded mixture of k Gaussian blobs (pairwise center distance at least
/// `separation`) plus uniform outliers and exact duplicate rows. Ground-truth
/// labels are the blob indices; outliers carry label k. Row order is a seeded
/// shuffle. round(n * outlier_frac) outliers and round(n * duplicate_frac)
/// duplicates are part of the n rows.
Dataset synth_blobs(int n, int k, int dim, double sigma, double separation, double outlier_frac,
                    double duplicate_frac, std::uint64_t seed);

/// Plain `key = value` configuration text: `#` starts a comment, repeated
/// keys form lists.
class ConfigMap {
public:
    static ConfigMap parse(std::istream& in);
    static ConfigMap parse_file(const std::string& path);

    bool has(const std::string& key) const;
    /// Last occurrence of the key, if any.
    std::optional<std::string> value(const std::string& key) const;
    std::vector<std::string> values(const std::string& key) const;

    std::string require(const std::string& key) const;
    long get_int(const std::string& key, long fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;

    /// Throws when a key outside `known` was given (typo guard).
    void check_known(const std::vector<std::string>& known) const;

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

struct SynthSpec {
    int n = 150;
    int k = 3;
    int dim = 2;
    double sigma = 0.5;
    double separation = 6.0;
    double duplicate_frac = 0.0;
};

struct WavSpec {
    std::string speech_dir;
    std::map<std::string, std::string> noise_files;   // condition name -> wav path
};

/// A column of the report: for synthetic sources the value is the outlier
/// fraction, for wav sources the SNR in dB, otherwise unused.
struct Condition {
    std::string name;
    double value = 0.0;
};

struct ExperimentConfig {
    std::optional<SynthSpec> synth;
    std::optional<std::string> csv_path;
    std::optional<WavSpec> wav;
    std::vector<Condition> conditions;
    std::vector<std::string> methods;   // kmeans | pam | fuzzy_cmeans | mlncf | rcfm
    int k = 3;
    std::vector<std::uint64_t> seeds;
    std::uint64_t data_seed = 1;
    std::vector<BaseMethod> ensemble_methods;   // base clusterers for mlncf/rcfm
    int ensemble_seed_count = 3;
    TrainerConfig trainer;
    std::optional<MaintenanceConfig> maintenance;
    MfccConfig mfcc;
    std::string out_path = "report.txt";

    void validate() const;
};

/// methods x conditions grid of accuracy percentages.
struct ReportTable {
    std::vector<std::string> methods;
    std::vector<std::string> conditions;
    Matrix cells;
};

ExperimentConfig parse_experiment_config(const ConfigMap& map);

/// Ensemble settings shared by the consensus/rcfm entry points; reads the
/// k/seed/method/train.*/maintain.* keys.
EnsembleConfig parse_ensemble_config(const ConfigMap& map);

/// For every condition builds or loads the dataset, runs every method with
/// every replicate seed, and fills the grid with the median accuracy over
/// seeds (as a percentage, outlier rows excluded from scoring). The optional
/// manifest receives a textual record of all settings, derived seeds and
/// per-seed accuracies.
ReportTable run_experiment(const ExperimentConfig& cfg, std::string* manifest = nullptr);

/// Fixed-width text table, two decimals per cell, methods as rows.
std::string format_table(const ReportTable& table);

/// Feature extraction used by the CLI: every *.wav in the directory (sorted)
/// becomes one row of pooled 3x-cepstra; a leading integer in the file name
/// becomes its label.
Dataset features_from_wav_dir(const std::string& dir, const MfccConfig& cfg);

double median(std::vector<double> values);

}  // namespace rcfm
