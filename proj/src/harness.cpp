#include "rcfm/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rcfm/clustering.hpp"
#include "rcfm/random.hpp"

namespace rcfm {

double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median: empty input");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

Dataset synth_blobs(int n, int k, int dim, double sigma, double separation, double outlier_frac,
                    double duplicate_frac, std::uint64_t seed) {
    if (n < 1 || k < 1 || dim < 1) throw std::invalid_argument("synth_blobs: bad counts");
    if (k > n) throw std::invalid_argument("synth_blobs: more blobs than points");
    if (sigma < 0.0 || separation < 0.0) throw std::invalid_argument("synth_blobs: bad scales");
    if (outlier_frac < 0.0 || outlier_frac >= 1.0 || duplicate_frac < 0.0 || duplicate_frac >= 1.0)
        throw std::invalid_argument("synth_blobs: fractions must be in [0, 1)");

    const int n_out = static_cast<int>(std::lround(n * outlier_frac));
    const int n_dup = static_cast<int>(std::lround(n * duplicate_frac));
    const int n_in = n - n_out - n_dup;
    if (n_in < k)
        throw std::invalid_argument("synth_blobs: not enough inliers left for every blob");

    Rng rng(seed);

    // rejection-sample centers until the pairwise separation holds
    Matrix centers(static_cast<std::size_t>(k), static_cast<std::size_t>(dim));
    double side = separation * std::max(2.0, static_cast<double>(k));
    for (int b = 0; b < k; ++b) {
        for (int attempt = 0;; ++attempt) {
            for (int j = 0; j < dim; ++j)
                centers(static_cast<std::size_t>(b), static_cast<std::size_t>(j)) =
                    rng.uniform(0.0, side);
            bool ok = true;
            for (int a = 0; a < b && ok; ++a)
                ok = euclidean_distance(centers.row(static_cast<std::size_t>(a)),
                                        centers.row(static_cast<std::size_t>(b))) >= separation;
            if (ok) break;
            if (attempt >= 1000) {
                side *= 2.0;
                attempt = 0;
            }
        }
    }
    double lo = centers.data()[0], hi = centers.data()[0];
    for (double v : centers.data()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double box_lo = lo - separation, box_hi = hi + separation;

    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    rows.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n_in; ++i) {
        const int blob = i % k;
        std::vector<double> row(static_cast<std::size_t>(dim));
        for (int j = 0; j < dim; ++j)
            row[static_cast<std::size_t>(j)] =
                centers(static_cast<std::size_t>(blob), static_cast<std::size_t>(j)) +
                sigma * rng.normal();
        rows.push_back(std::move(row));
        labels.push_back(blob);
    }
    for (int i = 0; i < n_dup; ++i) {
        const std::size_t src = rng.index(static_cast<std::size_t>(n_in));
        rows.push_back(rows[src]);
        labels.push_back(labels[src]);
    }
    for (int i = 0; i < n_out; ++i) {
        std::vector<double> row(static_cast<std::size_t>(dim));
        for (int j = 0; j < dim; ++j) row[static_cast<std::size_t>(j)] = rng.uniform(box_lo, box_hi);
        rows.push_back(std::move(row));
        labels.push_back(k);   // outlier class
    }

    // seeded shuffle so outliers are not grouped at the end
    std::vector<std::size_t> order(rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i-- > 1;) std::swap(order[i], order[rng.index(i + 1)]);

    Dataset d;
    d.points = Matrix(rows.size(), static_cast<std::size_t>(dim));
    d.ids.reserve(rows.size());
    std::vector<int> shuffled_labels(rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        for (int j = 0; j < dim; ++j)
            d.points(i, static_cast<std::size_t>(j)) = rows[order[i]][static_cast<std::size_t>(j)];
        shuffled_labels[i] = labels[order[i]];
        d.ids.push_back(std::to_string(i));
    }
    d.labels = std::move(shuffled_labels);
    d.validate();
    return d;
}

// ---------------------------------------------------------------- ConfigMap

ConfigMap ConfigMap::parse(std::istream& in) {
    ConfigMap map;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto strip = [](std::string s) {
            const std::size_t b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            const std::size_t e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        const std::string stripped = strip(line);
        if (stripped.empty()) continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: missing '=' on line " + std::to_string(line_no));
        const std::string key = strip(stripped.substr(0, eq));
        const std::string value = strip(stripped.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config: empty key on line " + std::to_string(line_no));
        map.entries_.emplace_back(key, value);
    }
    return map;
}

ConfigMap ConfigMap::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
    return parse(in);
}

bool ConfigMap::has(const std::string& key) const {
    return std::any_of(entries_.begin(), entries_.end(),
                       [&](const auto& e) { return e.first == key; });
}

std::optional<std::string> ConfigMap::value(const std::string& key) const {
    std::optional<std::string> out;
    for (const auto& [k, v] : entries_)
        if (k == key) out = v;
    return out;
}

std::vector<std::string> ConfigMap::values(const std::string& key) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : entries_)
        if (k == key) out.push_back(v);
    return out;
}

std::string ConfigMap::require(const std::string& key) const {
    const auto v = value(key);
    if (!v) throw std::invalid_argument("config: missing required key '" + key + "'");
    return *v;
}

long ConfigMap::get_int(const std::string& key, long fallback) const {
    const auto v = value(key);
    if (!v) return fallback;
    try {
        std::size_t used = 0;
        const long out = std::stol(*v, &used);
        if (used != v->size()) throw std::invalid_argument("trailing");
        return out;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: '" + key + "' must be an integer, got '" + *v + "'");
    }
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
    const auto v = value(key);
    if (!v) return fallback;
    double out = 0.0;
    const char* first = v->data();
    const char* last = v->data() + v->size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last)
        throw std::invalid_argument("config: '" + key + "' must be a number, got '" + *v + "'");
    return out;
}

std::uint64_t ConfigMap::get_u64(const std::string& key, std::uint64_t fallback) const {
    const auto v = value(key);
    if (!v) return fallback;
    try {
        std::size_t used = 0;
        const unsigned long long out = std::stoull(*v, &used);
        if (used != v->size()) throw std::invalid_argument("trailing");
        return out;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: '" + key + "' must be an unsigned integer, got '" +
                                    *v + "'");
    }
}

void ConfigMap::check_known(const std::vector<std::string>& known) const {
    for (const auto& [k, v] : entries_)
        if (std::find(known.begin(), known.end(), k) == known.end())
            throw std::invalid_argument("config: unknown key '" + k + "'");
}

// ------------------------------------------------------------ config parsing

namespace {

const std::vector<std::string> kEnsembleKeys = {
    "k",           "seed",          "method",           "train.lr",
    "train.epochs", "train.hidden", "train.seed",       "maintain.eps",
    "maintain.min_pts", "maintain.m", "maintain.xi",    "maintain.max_iter",
    "maintain.exponent_mode", "maintain.cov_reg", "maintain.dedup_radius",
};

std::pair<std::string, std::string> split_colon(const std::string& s, const char* what) {
    const std::size_t colon = s.find(':');
    if (colon == std::string::npos || colon == 0)
        throw std::invalid_argument(std::string("config: ") + what + " must look like name:value, got '" +
                                    s + "'");
    return {s.substr(0, colon), s.substr(colon + 1)};
}

double parse_number(const std::string& s, const char* what) {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw std::invalid_argument(std::string("config: ") + what + ": '" + s + "' is not a number");
    return out;
}

std::optional<MaintenanceConfig> parse_maintenance(const ConfigMap& map) {
    if (!map.has("maintain.eps") && !map.has("maintain.min_pts")) return std::nullopt;
    MaintenanceConfig mc;
    mc.soft.eps = map.get_double("maintain.eps", mc.soft.eps);
    mc.soft.min_pts = static_cast<int>(map.get_int("maintain.min_pts", mc.soft.min_pts));
    mc.soft.m = map.get_double("maintain.m", mc.soft.m);
    mc.soft.xi = map.get_double("maintain.xi", mc.soft.xi);
    mc.soft.max_iter = static_cast<int>(map.get_int("maintain.max_iter", mc.soft.max_iter));
    if (const auto mode = map.value("maintain.exponent_mode")) {
        if (*mode == "standard") mc.soft.exponent_mode = ExponentMode::standard;
        else if (*mode == "alternate") mc.soft.exponent_mode = ExponentMode::alternate;
        else throw std::invalid_argument("config: maintain.exponent_mode must be standard or alternate");
    }
    if (map.has("maintain.cov_reg")) mc.soft.cov_reg = map.get_double("maintain.cov_reg", 0.0);
    mc.dedup_radius = map.get_double("maintain.dedup_radius", 0.0);
    mc.soft.validate();
    return mc;
}

TrainerConfig parse_trainer(const ConfigMap& map) {
    TrainerConfig t;
    t.lr = map.get_double("train.lr", t.lr);
    t.epochs = static_cast<int>(map.get_int("train.epochs", t.epochs));
    t.train_seed = map.get_u64("train.seed", t.train_seed);
    for (const std::string& h : map.values("train.hidden"))
        t.hidden_sizes.push_back(static_cast<int>(parse_number(h, "train.hidden")));
    return t;
}

}  // namespace

EnsembleConfig parse_ensemble_config(const ConfigMap& map) {
    map.check_known(kEnsembleKeys);
    EnsembleConfig cfg;
    cfg.k = static_cast<int>(map.get_int("k", cfg.k));
    for (const std::string& s : map.values("seed"))
        cfg.seeds.push_back(static_cast<std::uint64_t>(std::stoull(s)));
    if (cfg.seeds.empty()) cfg.seeds.push_back(1);
    const auto methods = map.values("method");
    if (methods.empty()) {
        cfg.methods = {BaseMethod::kmeans, BaseMethod::pam, BaseMethod::fuzzy_cmeans};
    } else {
        for (const std::string& m : methods) cfg.methods.push_back(base_method_from_string(m));
    }
    cfg.trainer = parse_trainer(map);
    cfg.maintenance = parse_maintenance(map);
    cfg.validate();
    return cfg;
}

void ExperimentConfig::validate() const {
    const int sources = (synth ? 1 : 0) + (csv_path ? 1 : 0) + (wav ? 1 : 0);
    if (sources != 1)
        throw std::invalid_argument("experiment: exactly one data source required (synth, csv or wav)");
    if (conditions.empty()) throw std::invalid_argument("experiment: at least one condition required");
    if (methods.empty()) throw std::invalid_argument("experiment: at least one method required");
    for (const std::string& m : methods)
        if (m != "kmeans" && m != "pam" && m != "fuzzy_cmeans" && m != "mlncf" && m != "rcfm")
            throw std::invalid_argument("experiment: unknown method '" + m + "'");
    if (std::find(methods.begin(), methods.end(), "rcfm") != methods.end() && !maintenance)
        throw std::invalid_argument("experiment: rcfm requires maintain.* settings");
    if (k < 1) throw std::invalid_argument("experiment: k must be at least 1");
    if (seeds.empty()) throw std::invalid_argument("experiment: at least one seed required");
    if (ensemble_methods.empty())
        throw std::invalid_argument("experiment: ensemble method list is empty");
    if (ensemble_seed_count < 1)
        throw std::invalid_argument("experiment: ensemble_seed_count must be at least 1");
}

ExperimentConfig parse_experiment_config(const ConfigMap& map) {
    static const std::vector<std::string> known = {
        "synth.n",       "synth.k",          "synth.dim",   "synth.sigma",
        "synth.separation", "synth.duplicate_frac",
        "csv",           "wav.speech_dir",   "noise",
        "condition",     "method",           "k",           "seed",
        "data_seed",     "ensemble.method",  "ensemble.seed_count",
        "train.lr",      "train.epochs",     "train.hidden", "train.seed",
        "maintain.eps",  "maintain.min_pts", "maintain.m",  "maintain.xi",
        "maintain.max_iter", "maintain.exponent_mode", "maintain.cov_reg",
        "maintain.dedup_radius", "out",
        "mfcc.frame_len", "mfcc.frame_shift", "mfcc.n_filters", "mfcc.n_ceps",
    };
    map.check_known(known);

    ExperimentConfig cfg;
    if (map.has("synth.n") || map.has("synth.k")) {
        SynthSpec s;
        s.n = static_cast<int>(map.get_int("synth.n", s.n));
        s.k = static_cast<int>(map.get_int("synth.k", s.k));
        s.dim = static_cast<int>(map.get_int("synth.dim", s.dim));
        s.sigma = map.get_double("synth.sigma", s.sigma);
        s.separation = map.get_double("synth.separation", s.separation);
        s.duplicate_frac = map.get_double("synth.duplicate_frac", s.duplicate_frac);
        cfg.synth = s;
    }
    if (const auto p = map.value("csv")) cfg.csv_path = *p;
    if (const auto d = map.value("wav.speech_dir")) {
        WavSpec w;
        w.speech_dir = *d;
        for (const std::string& n : map.values("noise")) {
            const auto [name, path] = split_colon(n, "noise");
            w.noise_files[name] = path;
        }
        cfg.wav = w;
    }
    for (const std::string& c : map.values("condition")) {
        const auto [name, value] = split_colon(c, "condition");
        cfg.conditions.push_back({name, parse_number(value, "condition")});
    }
    cfg.methods = map.values("method");
    cfg.k = static_cast<int>(map.get_int("k", cfg.k));
    for (const std::string& s : map.values("seed"))
        cfg.seeds.push_back(static_cast<std::uint64_t>(std::stoull(s)));
    cfg.data_seed = map.get_u64("data_seed", cfg.data_seed);
    const auto ensemble_methods = map.values("ensemble.method");
    if (ensemble_methods.empty()) {
        cfg.ensemble_methods = {BaseMethod::kmeans, BaseMethod::pam, BaseMethod::fuzzy_cmeans};
    } else {
        for (const std::string& m : ensemble_methods)
            cfg.ensemble_methods.push_back(base_method_from_string(m));
    }
    cfg.ensemble_seed_count =
        static_cast<int>(map.get_int("ensemble.seed_count", cfg.ensemble_seed_count));
    cfg.trainer = parse_trainer(map);
    cfg.maintenance = parse_maintenance(map);
    cfg.mfcc.frame_len = static_cast<int>(map.get_int("mfcc.frame_len", cfg.mfcc.frame_len));
    cfg.mfcc.frame_shift = static_cast<int>(map.get_int("mfcc.frame_shift", cfg.mfcc.frame_shift));
    cfg.mfcc.n_filters = static_cast<int>(map.get_int("mfcc.n_filters", cfg.mfcc.n_filters));
    cfg.mfcc.n_ceps = static_cast<int>(map.get_int("mfcc.n_ceps", cfg.mfcc.n_ceps));
    if (const auto o = map.value("out")) cfg.out_path = *o;
    cfg.validate();
    return cfg;
}

// ------------------------------------------------------------- experiment

Dataset features_from_wav_dir(const std::string& dir, const MfccConfig& cfg) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw std::invalid_argument("features: '" + dir + "' is not a directory");
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".wav")
            files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::invalid_argument("features: no .wav files in '" + dir + "'");

    std::vector<std::vector<double>> rows;
    std::vector<std::string> ids;
    std::vector<int> labels;
    bool all_labelled = true;
    for (const std::string& f : files) {
        const Signal sig = read_wav(f);
        const Matrix frames = add_deltas(mfcc(sig, cfg), cfg.delta_width);
        rows.push_back(pool_utterance(frames));
        const std::string stem = fs::path(f).stem().string();
        ids.push_back(stem);
        if (!stem.empty() && std::isdigit(static_cast<unsigned char>(stem[0]))) {
            labels.push_back(stem[0] - '0');
        } else {
            all_labelled = false;
        }
    }
    Dataset d;
    d.points = Matrix(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows.front().size())
            throw std::invalid_argument("features: inconsistent feature widths");
        for (std::size_t j = 0; j < rows[i].size(); ++j) d.points(i, j) = rows[i][j];
    }
    d.ids = std::move(ids);
    if (all_labelled && labels.size() == rows.size()) d.labels = std::move(labels);
    d.validate();
    return d;
}

namespace {

struct BuiltDataset {
    Dataset data;
    std::optional<int> outlier_label;
};

BuiltDataset build_condition_dataset(const ExperimentConfig& cfg, const Condition& cond,
                                     std::size_t cond_index) {
    const std::uint64_t dseed = derive_seed(cfg.data_seed, cond_index);
    if (cfg.synth) {
        const SynthSpec& s = *cfg.synth;
        BuiltDataset out;
        out.data = synth_blobs(s.n, s.k, s.dim, s.sigma, s.separation, cond.value,
                               s.duplicate_frac, dseed);
        if (cond.value > 0.0) out.outlier_label = s.k;
        return out;
    }
    if (cfg.csv_path) return {load_csv(*cfg.csv_path), std::nullopt};

    // wav source: pool features per utterance, mixing condition noise first
    const WavSpec& w = *cfg.wav;
    namespace fs = std::filesystem;
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(w.speech_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".wav")
            files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    if (files.empty())
        throw std::invalid_argument("experiment: no .wav files in '" + w.speech_dir + "'");

    std::optional<Signal> noise;
    if (const auto it = w.noise_files.find(cond.name); it != w.noise_files.end())
        noise = read_wav(it->second);

    std::vector<std::vector<double>> rows;
    std::vector<std::string> ids;
    std::vector<int> labels;
    bool all_labelled = true;
    for (std::size_t u = 0; u < files.size(); ++u) {
        Signal sig = read_wav(files[u]);
        if (noise) sig = mix_at_snr(sig, *noise, cond.value, derive_seed(dseed, u)).mixed;
        const Matrix frames = add_deltas(mfcc(sig, cfg.mfcc), cfg.mfcc.delta_width);
        rows.push_back(pool_utterance(frames));
        const std::string stem = fs::path(files[u]).stem().string();
        ids.push_back(stem);
        if (!stem.empty() && std::isdigit(static_cast<unsigned char>(stem[0])))
            labels.push_back(stem[0] - '0');
        else
            all_labelled = false;
    }
    BuiltDataset out;
    out.data.points = Matrix(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) out.data.points(i, j) = rows[i][j];
    out.data.ids = std::move(ids);
    if (all_labelled && labels.size() == rows.size()) out.data.labels = std::move(labels);
    out.data.validate();
    return out;
}

EnsembleConfig ensemble_for_cell(const ExperimentConfig& cfg, std::uint64_t replicate_seed,
                                 bool with_maintenance) {
    EnsembleConfig e;
    e.methods = cfg.ensemble_methods;
    e.k = cfg.k;
    for (int j = 0; j < cfg.ensemble_seed_count; ++j)
        e.seeds.push_back(derive_seed(replicate_seed, 1000 + static_cast<std::uint64_t>(j)));
    e.trainer = cfg.trainer;
    e.trainer.train_seed = derive_seed(replicate_seed, 2000);
    if (with_maintenance) e.maintenance = cfg.maintenance;
    return e;
}

double score(const Partition& pred, const std::vector<int>& truth, std::optional<int> outlier_label) {
    if (!outlier_label) return clustering_accuracy(pred, truth);
    Partition sub;
    sub.k = pred.k;
    std::vector<int> sub_truth;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] == *outlier_label) continue;
        sub.assignment.push_back(pred.assignment[i]);
        sub_truth.push_back(truth[i]);
    }
    if (sub_truth.empty()) throw std::runtime_error("experiment: every row is an outlier");
    return clustering_accuracy(sub, sub_truth);
}

double run_cell_method(const ExperimentConfig& cfg, const std::string& method, const Dataset& data,
                       std::optional<int> outlier_label, std::uint64_t replicate_seed) {
    if (!data.labels)
        throw std::runtime_error("experiment: ground truth labels required for scoring");
    Partition pred;
    if (method == "kmeans") {
        pred = kmeans(data, cfg.k, replicate_seed);
    } else if (method == "pam") {
        pred = pam(data, cfg.k, replicate_seed);
    } else if (method == "fuzzy_cmeans") {
        pred = harden(fuzzy_cmeans(data, cfg.k, 2.0, 1e-6, replicate_seed, 300));
    } else if (method == "mlncf") {
        pred = mlncf(data, ensemble_for_cell(cfg, replicate_seed, false)).final;
    } else if (method == "rcfm") {
        const RcfmResult r = rcfm(data, ensemble_for_cell(cfg, replicate_seed, true));
        pred = *r.full;
    } else {
        throw std::invalid_argument("experiment: unknown method '" + method + "'");
    }
    return score(pred, *data.labels, outlier_label);
}

}  // namespace

ReportTable run_experiment(const ExperimentConfig& cfg, std::string* manifest) {
    cfg.validate();
    std::ostringstream man;
    char buf[64];
    auto fmt = [&buf](double v) {
        std::snprintf(buf, sizeof(buf), "%.6f", v);
        return std::string(buf);
    };

    man << "k = " << cfg.k << "\n";
    for (const std::string& m : cfg.methods) man << "method = " << m << "\n";
    for (const Condition& c : cfg.conditions)
        man << "condition = " << c.name << ":" << fmt(c.value) << "\n";
    for (std::uint64_t s : cfg.seeds) man << "seed = " << s << "\n";
    man << "data_seed = " << cfg.data_seed << "\n";
    if (cfg.synth) {
        man << "synth.n = " << cfg.synth->n << "\nsynth.k = " << cfg.synth->k
            << "\nsynth.dim = " << cfg.synth->dim << "\nsynth.sigma = " << fmt(cfg.synth->sigma)
            << "\nsynth.separation = " << fmt(cfg.synth->separation)
            << "\nsynth.duplicate_frac = " << fmt(cfg.synth->duplicate_frac) << "\n";
    }
    if (cfg.csv_path) man << "csv = " << *cfg.csv_path << "\n";
    if (cfg.wav) man << "wav.speech_dir = " << cfg.wav->speech_dir << "\n";
    for (BaseMethod m : cfg.ensemble_methods) man << "ensemble.method = " << to_string(m) << "\n";
    man << "ensemble.seed_count = " << cfg.ensemble_seed_count << "\n";
    man << "train.lr = " << fmt(cfg.trainer.lr) << "\n";
    man << "train.epochs = " << cfg.trainer.epochs << "\n";
    if (cfg.maintenance) {
        man << "maintain.eps = " << fmt(cfg.maintenance->soft.eps) << "\n";
        man << "maintain.min_pts = " << cfg.maintenance->soft.min_pts << "\n";
        man << "maintain.dedup_radius = " << fmt(cfg.maintenance->dedup_radius) << "\n";
    }

    ReportTable table;
    table.methods = cfg.methods;
    for (const Condition& c : cfg.conditions) table.conditions.push_back(c.name);
    table.cells = Matrix(cfg.methods.size(), cfg.conditions.size(), 0.0);

    for (std::size_t ci = 0; ci < cfg.conditions.size(); ++ci) {
        const BuiltDataset built = build_condition_dataset(cfg, cfg.conditions[ci], ci);
        man << "condition[" << cfg.conditions[ci].name << "].rows = " << built.data.size() << "\n";
        for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
            std::vector<double> accs;
            for (std::size_t si = 0; si < cfg.seeds.size(); ++si) {
                const std::uint64_t cell_seed = derive_seed(cfg.seeds[si], mix_seed(ci * 7919 + mi));
                double acc;
                try {
                    acc = run_cell_method(cfg, cfg.methods[mi], built.data, built.outlier_label,
                                          cell_seed);
                } catch (const std::exception& e) {
                    throw std::runtime_error("experiment(" + cfg.methods[mi] + ", " +
                                             cfg.conditions[ci].name + "): " + e.what());
                }
                accs.push_back(acc);
                man << "cell[" << cfg.methods[mi] << "][" << cfg.conditions[ci].name << "].seed["
                    << cfg.seeds[si] << "] = " << fmt(100.0 * acc) << "\n";
            }
            table.cells(mi, ci) = 100.0 * median(accs);
            man << "cell[" << cfg.methods[mi] << "][" << cfg.conditions[ci].name
                << "].median = " << fmt(table.cells(mi, ci)) << "\n";
        }
    }
    if (manifest) *manifest = man.str();
    return table;
}

std::string format_table(const ReportTable& table) {
    if (table.methods.empty() || table.conditions.empty())
        throw std::invalid_argument("format_table: empty table");
    if (table.cells.rows() != table.methods.size() ||
        table.cells.cols() != table.conditions.size())
        throw std::invalid_argument("format_table: incomplete grid");

    std::size_t method_width = std::string("Method").size();
    for (const std::string& m : table.methods) method_width = std::max(method_width, m.size());
    std::vector<std::size_t> col_width(table.conditions.size());
    char buf[32];
    for (std::size_t c = 0; c < table.conditions.size(); ++c) {
        col_width[c] = std::max<std::size_t>(table.conditions[c].size(), 6);
        for (std::size_t r = 0; r < table.methods.size(); ++r) {
            std::snprintf(buf, sizeof(buf), "%.2f", table.cells(r, c));
            col_width[c] = std::max(col_width[c], std::strlen(buf));
        }
    }

    std::ostringstream out;
    out << "Method";
    out << std::string(method_width - 6, ' ');
    for (std::size_t c = 0; c < table.conditions.size(); ++c) {
        out << "  ";
        out << std::string(col_width[c] - table.conditions[c].size(), ' ') << table.conditions[c];
    }
    out << "\n";
    for (std::size_t r = 0; r < table.methods.size(); ++r) {
        out << table.methods[r] << std::string(method_width - table.methods[r].size(), ' ');
        for (std::size_t c = 0; c < table.conditions.size(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.2f", table.cells(r, c));
            out << "  " << std::string(col_width[c] - std::strlen(buf), ' ') << buf;
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace rcfm
