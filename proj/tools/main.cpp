// Command-line front end: feature extraction, noise mixing, clustering,
// database maintenance, consensus runs and the full experiment harness.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "rcfm/clustering.hpp"
#include "rcfm/consensus.hpp"
#include "rcfm/harness.hpp"
#include "rcfm/soft_dbscan.hpp"
#include "rcfm/speech.hpp"

namespace {

int run(CLI::App& app, int argc, char** argv) {
    app.require_subcommand(1);

    // features <wav-dir> --out features.csv
    auto* features = app.add_subcommand("features", "pooled cepstral features for a wav directory");
    std::string wav_dir, features_out = "features.csv";
    rcfm::MfccConfig mfcc_cfg;
    features->add_option("wav-dir", wav_dir, "directory of 16-bit mono wav files")->required();
    features->add_option("--out", features_out, "output CSV path");
    features->add_option("--frame-len", mfcc_cfg.frame_len, "frame length in samples");
    features->add_option("--frame-shift", mfcc_cfg.frame_shift, "frame shift in samples");
    features->add_option("--n-filters", mfcc_cfg.n_filters, "mel filter count");
    features->add_option("--n-ceps", mfcc_cfg.n_ceps, "cepstra per frame");

    // mix <speech.wav> <noise.wav> --snr-db 0 --out noisy.wav
    auto* mix = app.add_subcommand("mix", "add noise to speech at a target SNR");
    std::string mix_speech, mix_noise, mix_out = "noisy.wav";
    double snr_db = 0.0;
    std::uint64_t mix_seed = 1;
    mix->add_option("speech", mix_speech, "speech wav")->required();
    mix->add_option("noise", mix_noise, "noise wav")->required();
    mix->add_option("--snr-db", snr_db, "target signal-to-noise ratio in dB");
    mix->add_option("--seed", mix_seed, "seed for the noise segment offset");
    mix->add_option("--out", mix_out, "output wav path");

    // cluster <data.csv> --method kmeans --k 10 --seed 1
    auto* cluster = app.add_subcommand("cluster", "run one base clusterer");
    std::string cluster_csv, cluster_method = "kmeans", cluster_out = "labels.csv";
    int cluster_k = 2;
    std::uint64_t cluster_seed = 1;
    double cluster_eps = 1.0, fcm_m = 2.0;
    int cluster_min_pts = 4;
    cluster->add_option("data", cluster_csv, "input CSV")->required();
    cluster->add_option("--method", cluster_method, "kmeans | pam | fuzzy_cmeans | dbscan");
    cluster->add_option("--k", cluster_k, "cluster count");
    cluster->add_option("--seed", cluster_seed, "seed");
    cluster->add_option("--eps", cluster_eps, "dbscan radius");
    cluster->add_option("--min-pts", cluster_min_pts, "dbscan density threshold");
    cluster->add_option("--m", fcm_m, "fuzzy weighting exponent");
    cluster->add_option("--out", cluster_out, "output labels CSV");

    // maintain <data.csv> --eps E --min-pts P
    auto* maintain_cmd = app.add_subcommand("maintain", "remove noisy and redundant rows");
    std::string maintain_csv, maintain_out = "reduced.csv";
    rcfm::SoftDbscanConfig soft_cfg;
    double maintain_cov_reg = -1.0, dedup_radius = 0.0;
    std::string exponent_mode = "standard";
    maintain_cmd->add_option("data", maintain_csv, "input CSV")->required();
    maintain_cmd->add_option("--eps", soft_cfg.eps, "density radius")->required();
    maintain_cmd->add_option("--min-pts", soft_cfg.min_pts, "density threshold")->required();
    maintain_cmd->add_option("--m", soft_cfg.m, "fuzzy weighting exponent");
    maintain_cmd->add_option("--xi", soft_cfg.xi, "convergence tolerance");
    maintain_cmd->add_option("--max-iter", soft_cfg.max_iter, "iteration cap");
    maintain_cmd->add_option("--cov-reg", maintain_cov_reg, "covariance ridge (negative = auto)");
    maintain_cmd->add_option("--exponent-mode", exponent_mode, "standard | alternate");
    maintain_cmd->add_option("--dedup-radius", dedup_radius, "same-cluster duplicate radius");
    maintain_cmd->add_option("--out", maintain_out, "reduced CSV path");

    // consensus <data.csv> --config run.cfg ; rcfm <data.csv> --config run.cfg
    auto* consensus_cmd = app.add_subcommand("consensus", "ensemble consensus without maintenance");
    auto* rcfm_cmd = app.add_subcommand("rcfm", "maintenance followed by ensemble consensus");
    std::string cons_csv, cons_cfg_path, cons_out = "labels.csv";
    std::string rcfm_csv, rcfm_cfg_path, rcfm_out = "labels.csv";
    consensus_cmd->add_option("data", cons_csv, "input CSV")->required();
    consensus_cmd->add_option("--config", cons_cfg_path, "run configuration")->required();
    consensus_cmd->add_option("--out", cons_out, "output labels CSV");
    rcfm_cmd->add_option("data", rcfm_csv, "input CSV")->required();
    rcfm_cmd->add_option("--config", rcfm_cfg_path, "run configuration")->required();
    rcfm_cmd->add_option("--out", rcfm_out, "output labels CSV");

    // experiment --config exp.cfg --out report.txt
    auto* experiment_cmd = app.add_subcommand("experiment", "methods x conditions accuracy table");
    std::string exp_cfg_path, exp_out;
    experiment_cmd->add_option("--config", exp_cfg_path, "experiment configuration")->required();
    experiment_cmd->add_option("--out", exp_out, "report path (overrides config)");

    app.parse(argc, argv);

    if (*features) {
        const rcfm::Dataset d = rcfm::features_from_wav_dir(wav_dir, mfcc_cfg);
        rcfm::write_csv(d, features_out);
        std::cout << "wrote " << d.size() << " x " << d.dim() << " features to " << features_out
                  << "\n";
    } else if (*mix) {
        const rcfm::Signal speech = rcfm::read_wav(mix_speech);
        const rcfm::Signal noise = rcfm::read_wav(mix_noise);
        const rcfm::MixResult r = rcfm::mix_at_snr(speech, noise, snr_db, mix_seed);
        rcfm::write_wav(r.mixed, mix_out);
        std::cout << "gain " << r.gain << ", clipped " << r.clipped << " samples, wrote "
                  << mix_out << "\n";
    } else if (*cluster) {
        const rcfm::Dataset d = rcfm::load_csv(cluster_csv);
        rcfm::Partition p;
        if (cluster_method == "kmeans") {
            p = rcfm::kmeans(d, cluster_k, cluster_seed);
        } else if (cluster_method == "pam") {
            p = rcfm::pam(d, cluster_k, cluster_seed);
        } else if (cluster_method == "fuzzy_cmeans") {
            p = rcfm::harden(rcfm::fuzzy_cmeans(d, cluster_k, fcm_m, 1e-6, cluster_seed, 300));
        } else if (cluster_method == "dbscan") {
            const rcfm::DbscanResult r = rcfm::dbscan(d, cluster_eps, cluster_min_pts);
            std::ofstream out(cluster_out);
            if (!out) throw std::runtime_error("cannot write '" + cluster_out + "'");
            out << "id,final_label\n";
            for (std::size_t i = 0; i < d.size(); ++i)
                out << d.ids[i] << ',' << r.assignment[i] << '\n';
            std::cout << r.k << " clusters, " << r.noise_ids.size() << " noise points, wrote "
                      << cluster_out << "\n";
            return 0;
        } else {
            throw CLI::ValidationError("--method", "unknown method '" + cluster_method + "'");
        }
        rcfm::write_labels_csv(d, p, cluster_out);
        if (d.labels)
            std::cout << "accuracy " << rcfm::clustering_accuracy(p, *d.labels) << "\n";
        std::cout << "wrote " << cluster_out << "\n";
    } else if (*maintain_cmd) {
        if (exponent_mode == "alternate") soft_cfg.exponent_mode = rcfm::ExponentMode::alternate;
        else if (exponent_mode != "standard")
            throw CLI::ValidationError("--exponent-mode", "must be standard or alternate");
        if (maintain_cov_reg >= 0.0) soft_cfg.cov_reg = maintain_cov_reg;
        const rcfm::Dataset d = rcfm::load_csv(maintain_csv);
        const rcfm::MaintainedDataset m = rcfm::maintain(d, soft_cfg, dedup_radius);
        rcfm::write_csv(m.reduced, maintain_out);
        std::cout << "kept " << m.kept.size() << ", removed " << m.removed_noisy.size()
                  << " noisy and " << m.removed_redundant.size() << " redundant rows, wrote "
                  << maintain_out << "\n";
    } else if (*consensus_cmd || *rcfm_cmd) {
        const bool with_maintenance = static_cast<bool>(*rcfm_cmd);
        const std::string& csv = with_maintenance ? rcfm_csv : cons_csv;
        const std::string& cfg_path = with_maintenance ? rcfm_cfg_path : cons_cfg_path;
        const std::string& out_path = with_maintenance ? rcfm_out : cons_out;
        const rcfm::Dataset d = rcfm::load_csv(csv);
        rcfm::EnsembleConfig cfg = rcfm::parse_ensemble_config(rcfm::ConfigMap::parse_file(cfg_path));
        if (with_maintenance && !cfg.maintenance)
            throw std::runtime_error("rcfm: config must provide maintain.* settings");
        if (!with_maintenance) cfg.maintenance.reset();
        const rcfm::RcfmResult result =
            with_maintenance ? rcfm::rcfm(d, cfg) : rcfm::mlncf(d, cfg);
        const rcfm::Partition& labels = result.full ? *result.full : result.final;
        rcfm::write_labels_csv(d, labels, out_path);
        rcfm::write_manifest(cfg, result, out_path + ".manifest");
        if (d.labels)
            std::cout << "accuracy " << rcfm::clustering_accuracy(labels, *d.labels) << "\n";
        std::cout << "wrote " << out_path << " and " << out_path << ".manifest\n";
    } else if (*experiment_cmd) {
        rcfm::ExperimentConfig cfg =
            rcfm::parse_experiment_config(rcfm::ConfigMap::parse_file(exp_cfg_path));
        if (!exp_out.empty()) cfg.out_path = exp_out;
        std::string manifest;
        const rcfm::ReportTable table = rcfm::run_experiment(cfg, &manifest);
        const std::string text = rcfm::format_table(table);
        std::ofstream out(cfg.out_path);
        if (!out) throw std::runtime_error("cannot write '" + cfg.out_path + "'");
        out << text;
        std::ofstream man(cfg.out_path + ".manifest");
        if (!man) throw std::runtime_error("cannot write '" + cfg.out_path + ".manifest'");
        man << manifest;
        std::cout << text;
        std::cout << "wrote " << cfg.out_path << " and " << cfg.out_path << ".manifest\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"clustering-ensemble toolkit"};
    try {
        return run(app, argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e);
        return 0;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
