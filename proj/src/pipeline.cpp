#include "radiomics/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "radiomics/errors.hpp"
#include "radiomics/math_utils.hpp"
#include "radiomics/rng.hpp"
#include "radiomics/selection.hpp"

namespace radiomics {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    std::size_t b = s.find_last_not_of(" \t");
    if (a == std::string::npos) return "";
    return s.substr(a, b - a + 1);
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    for (double v : parse_double_list(s)) out.push_back(static_cast<int>(v));
    return out;
}

template <typename T>
std::string join_list(const std::vector<T>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i)
        s += (i ? "," : "") + [&] {
            if constexpr (std::is_same_v<T, double>) return format_double(v[i]);
            else return std::to_string(v[i]);
        }();
    return s;
}

} // namespace

void apply_config_file(PipelineConfig& config, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config file '" + path + "'");
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw data_error("config line " + std::to_string(line_no) +
                             " is not of the form key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "seed") config.seed = std::stoull(value);
            else if (key == "threads") config.threads = std::stoi(value);
            else if (key == "volume_dir") config.volume_dir = value;
            else if (key == "mask_dir") config.mask_dir = value;
            else if (key == "clinical_csv") config.clinical_csv = value;
            else if (key == "model") config.model = feature_model_from_name(value);
            else if (key == "ng") config.ng = std::stoi(value);
            else if (key == "window") config.fractal.window = std::stoi(value);
            else if (key == "ptpsa_scales") config.fractal.ptpsa_scales = parse_int_list(value);
            else if (key == "mbm_max_lag") config.fractal.mbm_max_lag = std::stoi(value);
            else if (key == "holder_radii") config.fractal.holder_radii = parse_int_list(value);
            else if (key == "importance_threshold_mrf")
                config.importance_threshold_mrf = std::stod(value);
            else if (key == "importance_threshold_nfrf")
                config.importance_threshold_nfrf = std::stod(value);
            else if (key == "importance_cv") config.importance_cv = std::stoi(value);
            else if (key == "importance_max_candidates")
                config.importance_max_candidates = std::stoi(value);
            else if (key == "significance_alpha") config.significance_alpha = std::stod(value);
            else if (key == "folds") config.folds = std::stoi(value);
            else if (key == "iterations") config.iterations = std::stoi(value);
            else if (key == "trees") config.gbdt.trees = std::stoi(value);
            else if (key == "depth") config.gbdt.max_depth = std::stoi(value);
            else if (key == "learning_rate") config.gbdt.learning_rate = std::stod(value);
            else if (key == "min_leaf") config.gbdt.min_leaf = std::stoi(value);
            else if (key == "sampler") config.sampler = sampler_from_name(value);
            else if (key == "alpha_grid") config.alpha_grid = parse_double_list(value);
            else if (key == "survival_folds") config.survival_folds = std::stoi(value);
            else if (key == "survival_p_threshold")
                config.survival_p_threshold = std::stod(value);
            else if (key == "permutations") config.permutations = std::stoi(value);
            else if (key == "top_k") config.top_k = parse_int_list(value);
            else throw data_error("unknown config key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw data_error("config line " + std::to_string(line_no) + ": cannot parse value '" +
                             value + "' for key '" + key + "'");
        }
    }
}

std::string config_canonical_string(const PipelineConfig& c) {
    std::map<std::string, std::string> kv;
    kv["seed"] = std::to_string(c.seed);
    kv["volume_dir"] = c.volume_dir;
    kv["mask_dir"] = c.mask_dir;
    kv["clinical_csv"] = c.clinical_csv;
    kv["model"] = feature_model_name(c.model);
    kv["ng"] = std::to_string(c.ng);
    kv["window"] = std::to_string(c.fractal.window);
    kv["ptpsa_scales"] = join_list(c.fractal.ptpsa_scales);
    kv["mbm_max_lag"] = std::to_string(c.fractal.mbm_max_lag);
    kv["holder_radii"] = join_list(c.fractal.holder_radii);
    kv["importance_threshold_mrf"] = format_double(c.importance_threshold_mrf);
    kv["importance_threshold_nfrf"] = format_double(c.importance_threshold_nfrf);
    kv["importance_cv"] = std::to_string(c.importance_cv);
    kv["importance_max_candidates"] = std::to_string(c.importance_max_candidates);
    kv["significance_alpha"] = format_double(c.significance_alpha);
    kv["folds"] = std::to_string(c.folds);
    kv["iterations"] = std::to_string(c.iterations);
    kv["trees"] = std::to_string(c.gbdt.trees);
    kv["depth"] = std::to_string(c.gbdt.max_depth);
    kv["learning_rate"] = format_double(c.gbdt.learning_rate);
    kv["min_leaf"] = std::to_string(c.gbdt.min_leaf);
    kv["sampler"] = sampler_name(c.sampler);
    kv["alpha_grid"] = join_list(c.alpha_grid);
    kv["survival_folds"] = std::to_string(c.survival_folds);
    kv["survival_p_threshold"] = format_double(c.survival_p_threshold);
    kv["permutations"] = std::to_string(c.permutations);
    kv["top_k"] = join_list(c.top_k);
    std::string out;
    for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
    return out;
}

std::string config_hash(const PipelineConfig& c) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a_hash(config_canonical_string(c))));
    return buf;
}

namespace {

std::string find_study_file(const std::string& dir, const std::string& stem) {
    for (const char* ext : {".json", ".nii", ".nii.gz"}) {
        const fs::path p = fs::path(dir) / (stem + ext);
        if (fs::exists(p)) return p.string();
    }
    return "";
}

} // namespace

ExtractSummary cmd_extract(const PipelineConfig& config, const std::string& out_csv) {
    if (config.clinical_csv.empty()) throw data_error("extract: clinical_csv is required");
    if (config.volume_dir.empty()) throw data_error("extract: volume_dir is required");
    const LabeledDataset clinical = read_feature_csv(config.clinical_csv);
    const std::string mask_dir = config.mask_dir.empty() ? config.volume_dir : config.mask_dir;

    FeatureConfig fcfg;
    fcfg.ng = config.ng;
    fcfg.fractal = config.fractal;
    fcfg.threads = config.threads;

    // deterministic row order: sort patients by id
    std::vector<std::size_t> order(clinical.n_rows());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return clinical.patient_ids[a] < clinical.patient_ids[b];
    });

    LabeledDataset out;
    out.feature_names = feature_names(config.model);
    ExtractSummary summary;

    for (std::size_t i : order) {
        const std::string& pid = clinical.patient_ids[i];
        try {
            Study study;
            for (const char* mod : {"T1", "T1C", "T2", "FLAIR"}) {
                const std::string path = find_study_file(config.volume_dir, pid + "_" + mod);
                if (path.empty())
                    throw data_error("missing " + std::string(mod) + " volume for patient " + pid);
                study.volumes[mod] = load_volume(path, mod);
            }
            const std::string mask_path = find_study_file(mask_dir, pid + "_mask");
            if (mask_path.empty()) throw data_error("missing mask for patient " + pid);
            study.mask = load_mask(mask_path);

            const FeatureVector fv = extract_feature_vector(study, config.model, fcfg);
            std::vector<std::optional<double>> row;
            row.reserve(out.feature_names.size());
            for (const std::string& name : out.feature_names) {
                const auto it = fv.entries.find(name);
                row.push_back(it == fv.entries.end() ? std::nullopt : it->second);
            }
            out.patient_ids.push_back(pid);
            out.labels.push_back(clinical.labels[i]);
            out.time_days.push_back(clinical.time_days[i]);
            out.censor.push_back(clinical.censor[i]);
            out.rows.push_back(std::move(row));
            ++summary.processed;
        } catch (const std::exception& e) {
            summary.warnings.push_back("patient " + pid + " skipped: " + e.what());
            std::cerr << "warning: " << summary.warnings.back() << "\n";
            ++summary.skipped;
        }
    }
    if (summary.processed == 0) throw data_error("extract: no patient could be processed");
    write_feature_csv(out, out_csv);
    return summary;
}

SelectionOutcome run_selection(const LabeledDataset& data, const PipelineConfig& config) {
    SelectionOutcome outcome;
    LabeledDataset working = data;

    // univariate screen caps the quadratic backward elimination
    if (static_cast<int>(working.n_features()) > config.importance_max_candidates) {
        std::vector<std::pair<double, std::string>> by_p;
        for (const std::string& name : working.feature_names) {
            const std::size_t col = working.feature_index(name);
            std::vector<double> a, b;
            for (std::size_t i = 0; i < working.n_rows(); ++i) {
                if (!working.rows[i][col].has_value())
                    throw data_error("selection requires complete columns; feature '" + name +
                                     "' has missing values");
                (working.labels[i] == 1 ? a : b).push_back(*working.rows[i][col]);
            }
            double p = 1.0;
            if (!a.empty() && !b.empty())
                p = two_sample_test(a, b, TestKind::MannWhitney).p_value;
            by_p.emplace_back(p, name);
        }
        std::sort(by_p.begin(), by_p.end());
        std::vector<std::string> kept;
        for (int i = 0; i < config.importance_max_candidates; ++i) kept.push_back(by_p[i].second);
        std::sort(kept.begin(), kept.end());
        outcome.warnings.push_back("univariate screen reduced " +
                                   std::to_string(working.n_features()) + " features to " +
                                   std::to_string(kept.size()) + " candidates");
        working = working.select_features(kept);
    }

    ImportanceParams iparams;
    iparams.cv_folds = config.importance_cv;
    outcome.ranked = rank_by_f1_importance(working, iparams, Rng::mix(config.seed, 1));
    outcome.ranked.threshold_used = config.importance_threshold();
    outcome.after_threshold = select_top(outcome.ranked, config.importance_threshold());
    outcome.significant =
        significance_filter(working, outcome.after_threshold, config.significance_alpha);
    for (const FeatureTest& ft : outcome.significant) outcome.final_features.push_back(ft.name);
    if (outcome.final_features.empty()) {
        outcome.warnings.push_back(
            "no feature passed the significance filter; falling back to the importance "
            "threshold set");
        outcome.final_features = outcome.after_threshold;
    }
    return outcome;
}

namespace {

json metric_json(const MetricSummary& s, const std::vector<double>& values) {
    json j;
    j["mean"] = s.mean;
    j["std"] = s.stddev;
    j["values"] = values;
    return j;
}

void write_json(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write '" + path + "'");
    out << j.dump(2) << "\n";
}

} // namespace

void cmd_classify(const PipelineConfig& config, const std::string& features_csv,
                  const std::string& out_report) {
    LabeledDataset data = read_feature_csv(features_csv);
    int n1 = 0;
    for (int l : data.labels) n1 += l;
    if (n1 == 0 || n1 == static_cast<int>(data.n_rows()))
        throw data_error("classify: both classes must be present in the label column");

    std::vector<std::string> warnings;
    const std::vector<std::string> dropped = data.drop_missing_columns();
    if (!dropped.empty())
        warnings.push_back(std::to_string(dropped.size()) +
                           " feature columns with missing values dropped");

    SelectionOutcome sel = run_selection(data, config);
    warnings.insert(warnings.end(), sel.warnings.begin(), sel.warnings.end());

    const LabeledDataset selected = data.select_features(sel.final_features);
    TrainParams tparams;
    tparams.folds = config.folds;
    tparams.iterations = config.iterations;
    tparams.gbdt = config.gbdt;
    tparams.threads = config.threads;
    const auto [ensemble, metrics] =
        train_ensemble(selected, tparams, Rng::mix(config.seed, 2), config.sampler);

    json report;
    report["command"] = "classify";
    report["config_hash"] = config_hash(config);
    report["seed"] = config.seed;
    report["model"] = feature_model_name(config.model);
    report["sampler"] = sampler_name(config.sampler);
    report["folds"] = config.folds;
    report["iterations"] = config.iterations;
    report["ensemble_members"] = ensemble.members.size();
    json sel_json = json::array();
    for (const FeatureTest& ft : sel.significant) {
        double score = 0.0;
        for (const RankedFeature& rf : sel.ranked.ranked)
            if (rf.name == ft.name) score = rf.score;
        sel_json.push_back({{"feature", ft.name},
                            {"score", score},
                            {"p_value", ft.result.p_value},
                            {"test", ft.result.kind == TestKind::Welch ? "t" : "mann-whitney"}});
    }
    report["selected_features"] = sel_json;
    report["final_features"] = sel.final_features;
    report["metrics"] = {{"auc", metric_json(metrics.auc, metrics.auc_values)},
                         {"accuracy", metric_json(metrics.accuracy, metrics.accuracy_values)},
                         {"ppv", metric_json(metrics.ppv, metrics.ppv_values)},
                         {"fpr", metric_json(metrics.fpr, metrics.fpr_values)}};
    report["warnings"] = warnings;
    write_json(report, out_report);
}

SurvivalDataset survival_dataset_from_labeled(const LabeledDataset& data) {
    SurvivalDataset s;
    s.feature_names = data.feature_names;
    for (std::size_t i = 0; i < data.n_rows(); ++i) {
        if (!(data.time_days[i] > 0.0)) continue;
        std::vector<double> row;
        row.reserve(data.n_features());
        for (std::size_t c = 0; c < data.rows[i].size(); ++c) {
            if (!data.rows[i][c].has_value())
                throw data_error("survival analysis requires complete columns; feature '" +
                                 data.feature_names[c] + "' has missing values for patient " +
                                 data.patient_ids[i]);
            row.push_back(*data.rows[i][c]);
        }
        s.ids.push_back(data.patient_ids[i]);
        s.time.push_back(data.time_days[i]);
        s.event.push_back(data.censor[i]);
        s.x.push_back(std::move(row));
    }
    return s;
}

namespace {

void write_curve_csv(const std::string& path, const std::vector<double>& grid,
                     const SurvivalCurve& good, const SurvivalCurve& poor) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write '" + path + "'");
    out << "t,S_good,S_poor\n";
    for (double t : grid)
        out << format_double(t) << ',' << format_double(good.eval(t)) << ','
            << format_double(poor.eval(t)) << '\n';
}

} // namespace

void cmd_survival(const PipelineConfig& config, const std::string& features_csv,
                  const std::string& out_dir) {
    LabeledDataset data = read_feature_csv(features_csv);
    std::vector<std::string> warnings;
    const std::vector<std::string> dropped = data.drop_missing_columns();
    if (!dropped.empty())
        warnings.push_back(std::to_string(dropped.size()) +
                           " feature columns with missing values dropped");
    const SurvivalDataset surv = survival_dataset_from_labeled(data);
    if (surv.n() < 10)
        throw data_error("survival: need >= 10 rows with time_days > 0 (have " +
                         std::to_string(surv.n()) + ")");
    fs::create_directories(out_dir);

    const CvCIndexResult cv = cv_c_index(surv, config.alpha_grid, config.survival_folds,
                                         config.survival_p_threshold, Rng::mix(config.seed, 3),
                                         config.threads);
    const double best_alpha = cv.best_alpha;

    const std::vector<CoxFit> fits =
        select_survival_features(surv, best_alpha, config.survival_p_threshold);
    if (fits.empty())
        throw data_error("survival: no feature passed p < " +
                         format_double(config.survival_p_threshold) + " at alpha = " +
                         format_double(best_alpha) + "; cannot build a prognostic model");
    const PrognosticModel model = build_prognostic_model(surv, fits, fits.size());

    std::vector<double> pi;
    pi.reserve(surv.n());
    for (std::size_t i = 0; i < surv.n(); ++i)
        pi.push_back(prognostic_index(model, surv.feature_names, surv.x[i]));

    // curve CSVs share the pooled event-time grid
    std::vector<double> grid;
    for (std::size_t i = 0; i < surv.n(); ++i)
        if (surv.event[i] == 1) grid.push_back(surv.time[i]);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    const SeparationResult sep = curve_separation(surv.time, surv.event, pi, best_alpha,
                                                  config.permutations, Rng::mix(config.seed, 4),
                                                  config.threads);

    // independent (Kaplan-Meier) treatment of the same split
    std::vector<double> tg, tp;
    std::vector<int> eg, ep;
    for (std::size_t i = 0; i < surv.n(); ++i) {
        if (sep.poor_group[i] == 1) {
            tp.push_back(surv.time[i]);
            ep.push_back(surv.event[i]);
        } else {
            tg.push_back(surv.time[i]);
            eg.push_back(surv.event[i]);
        }
    }
    const SurvivalCurve km_good = kaplan_meier(tg, eg);
    const SurvivalCurve km_poor = kaplan_meier(tp, ep);
    double km_sep = 0.0;
    for (double t : grid) km_sep += std::fabs(km_good.eval(t) - km_poor.eval(t));
    km_sep /= static_cast<double>(grid.size());

    // c-index curve CSV
    {
        std::ofstream out(fs::path(out_dir) / "cindex_curve.csv");
        if (!out) throw io_error("cannot write cindex_curve.csv");
        out << "alpha,mean_cindex\n";
        for (const auto& [a, c] : cv.curve)
            out << format_double(a) << ',' << format_double(c) << '\n';
    }
    write_curve_csv((fs::path(out_dir) / "curves_dependent.csv").string(), grid, sep.good_curve,
                    sep.poor_curve);
    write_curve_csv((fs::path(out_dir) / "curves_independent.csv").string(), grid, km_good,
                    km_poor);
    {
        std::ofstream out(fs::path(out_dir) / "pi_groups.csv");
        if (!out) throw io_error("cannot write pi_groups.csv");
        out << "patient_id,pi,group\n";
        for (std::size_t i = 0; i < surv.n(); ++i)
            out << surv.ids[i] << ',' << format_double(pi[i]) << ','
                << (sep.poor_group[i] ? "poor" : "good") << '\n';
    }

    // top-k dead/alive classification (labels = event indicator)
    json topk_json = json::array();
    for (int k : config.top_k) {
        json entry;
        entry["k"] = k;
        const std::size_t use = std::min<std::size_t>(static_cast<std::size_t>(k), fits.size());
        if (use == 0) {
            entry["error"] = "no selected features";
            topk_json.push_back(entry);
            continue;
        }
        std::vector<std::string> names;
        for (std::size_t i = 0; i < use; ++i) names.push_back(fits[i].feature);
        std::sort(names.begin(), names.end());
        LabeledDataset cls;
        cls.feature_names = names;
        for (std::size_t i = 0; i < surv.n(); ++i) {
            cls.patient_ids.push_back(surv.ids[i]);
            cls.labels.push_back(surv.event[i]);
            cls.time_days.push_back(surv.time[i]);
            cls.censor.push_back(surv.event[i]);
            std::vector<std::optional<double>> row;
            for (const std::string& n : names) {
                const std::size_t c =
                    std::find(surv.feature_names.begin(), surv.feature_names.end(), n) -
                    surv.feature_names.begin();
                row.emplace_back(surv.x[i][c]);
            }
            cls.rows.push_back(std::move(row));
        }
        entry["features"] = names;
        try {
            TrainParams tparams;
            tparams.folds = config.folds;
            tparams.iterations = config.iterations;
            tparams.gbdt = config.gbdt;
            tparams.threads = config.threads;
            const auto [ens, metrics] = train_ensemble(
                cls, tparams, Rng::mix(config.seed, 5, static_cast<std::uint64_t>(k)),
                config.sampler);
            entry["metrics"] = {
                {"auc", metric_json(metrics.auc, metrics.auc_values)},
                {"accuracy", metric_json(metrics.accuracy, metrics.accuracy_values)},
                {"ppv", metric_json(metrics.ppv, metrics.ppv_values)},
                {"fpr", metric_json(metrics.fpr, metrics.fpr_values)}};
        } catch (const std::exception& e) {
            entry["error"] = e.what();
        }
        topk_json.push_back(entry);
    }

    json report;
    report["command"] = "survival";
    report["config_hash"] = config_hash(config);
    report["seed"] = config.seed;
    report["n_records"] = surv.n();
    report["best_alpha"] = best_alpha;
    report["kendall_tau"] = clayton_tau(best_alpha);
    json curve_json = json::array();
    for (const auto& [a, c] : cv.curve) curve_json.push_back({{"alpha", a}, {"mean_cindex", c}});
    report["cindex_curve"] = curve_json;
    json fits_json = json::array();
    for (const CoxFit& f : fits)
        fits_json.push_back({{"feature", f.feature},
                             {"beta", f.beta},
                             {"se", f.se},
                             {"p_value", f.p_value}});
    report["selected_features"] = fits_json;
    report["separation"] = {{"statistic", sep.statistic},
                            {"p_value", sep.p_value},
                            {"independent_statistic", km_sep},
                            {"n_good", surv.n() - static_cast<std::size_t>(std::count(
                                           sep.poor_group.begin(), sep.poor_group.end(), 1))},
                            {"n_poor", static_cast<std::size_t>(std::count(
                                           sep.poor_group.begin(), sep.poor_group.end(), 1))},
                            {"permutations", config.permutations}};
    report["topk_classification"] = topk_json;
    report["warnings"] = warnings;
    write_json(report, (fs::path(out_dir) / "report.json").string());
}

LabeledDataset synth_classification_dataset(const SynthClassificationParams& p,
                                            std::uint64_t seed) {
    if (p.n_major < 1 || p.n_minor < 1 || p.n_features < 1 || p.n_signal > p.n_features)
        throw data_error("synth classification: invalid parameters");
    Rng rng(seed);
    LabeledDataset data;
    char buf[16];
    for (int f = 0; f < p.n_features; ++f) {
        std::snprintf(buf, sizeof(buf), "f%03d", f);
        data.feature_names.push_back(buf);
    }
    const int total = p.n_major + p.n_minor;
    for (int i = 0; i < total; ++i) {
        const bool majority = i < p.n_major;
        std::snprintf(buf, sizeof(buf), "P%04d", i + 1);
        data.patient_ids.push_back(buf);
        data.labels.push_back(majority ? 1 : 0);
        data.time_days.push_back(0.0);
        data.censor.push_back(0);
        std::vector<std::optional<double>> row;
        row.reserve(static_cast<std::size_t>(p.n_features));
        for (int f = 0; f < p.n_features; ++f) {
            const double shift =
                f < p.n_signal ? (majority ? 0.5 : -0.5) * p.separation : 0.0;
            row.emplace_back(shift + rng.normal());
        }
        data.rows.push_back(std::move(row));
    }
    data.validate();
    return data;
}

SynthSurvivalResult synth_survival_dataset(const SynthSurvivalParams& p, std::uint64_t seed) {
    if (p.n < 1 || p.n_features < 1 || p.n_signal > p.n_features)
        throw data_error("synth survival: invalid parameters");
    if (p.tau < 0.0 || p.tau >= 1.0) throw data_error("synth survival: tau must lie in [0, 1)");
    const double alpha = clayton_alpha(p.tau);

    // Weibull margins; scales chosen so times land in a days-like range.
    const double log_lambda_t = std::log(1e-4);
    const double k_t = 1.2;
    const double log_lambda_u = std::log(2e-4);
    const double k_u = 1.0;

    Rng rng(seed);
    SynthSurvivalResult out;
    LabeledDataset& data = out.dataset;
    char buf[16];
    for (int f = 0; f < p.n_features; ++f) {
        std::snprintf(buf, sizeof(buf), "f%03d", f);
        data.feature_names.push_back(buf);
    }
    for (int i = 0; i < p.n; ++i) {
        std::snprintf(buf, sizeof(buf), "S%04d", i + 1);
        std::vector<double> x(static_cast<std::size_t>(p.n_features));
        for (double& v : x) v = rng.normal();
        double bx = 0.0;
        for (int f = 0; f < p.n_signal; ++f)
            bx += (f % 2 == 0 ? p.beta : -p.beta) * x[static_cast<std::size_t>(f)];

        const auto [log_u, log_v] = sample_clayton_pair(rng, alpha);
        // S_T(t|x) = exp(-lambda t^k e^{bx})  =>  t = ((-log u) e^{-bx}/lambda)^{1/k}
        const double t_death =
            std::exp((std::log(-log_u) - log_lambda_t - bx) / k_t);
        const double t_censor = std::exp((std::log(-log_v) - log_lambda_u) / k_u);
        const double y = std::min(t_death, t_censor);
        const int delta = t_death <= t_censor ? 1 : 0;

        data.patient_ids.push_back(buf);
        data.labels.push_back(delta);
        data.time_days.push_back(std::max(y, 1e-3));
        data.censor.push_back(delta);
        std::vector<std::optional<double>> row;
        row.reserve(x.size());
        for (double v : x) row.emplace_back(v);
        data.rows.push_back(std::move(row));
        out.latent_t.push_back(t_death);
        out.latent_u.push_back(t_censor);
    }
    data.validate();
    return out;
}

namespace {

// Ellipsoid phantom: NCR core, ET shell, ED rim. Class 1 tumors carry a
// rougher in-tumor texture and a thicker enhancing shell so both texture and
// volumetric features separate the classes.
void synth_study_files(const std::string& out_dir, const std::string& pid, int label, int dim,
                       Rng& rng) {
    const Dims dims{dim, dim, dim};
    const double c = 0.5 * (dim - 1);
    const double r_ncr = 0.12 * dim;
    const double r_et = (label == 1 ? 0.24 : 0.20) * dim;
    const double r_ed = 0.34 * dim;

    Mask mask;
    mask.dims = dims;
    mask.spacing = {1.0, 1.0, 1.0};
    mask.labels.assign(dims.count(), 0);
    std::size_t idx = 0;
    for (int z = 0; z < dim; ++z)
        for (int y = 0; y < dim; ++y)
            for (int x = 0; x < dim; ++x, ++idx) {
                const double r = std::sqrt((x - c) * (x - c) + (y - c) * (y - c) +
                                           (z - c) * (z - c));
                if (r < r_ncr) mask.labels[idx] = 1;
                else if (r < r_et) mask.labels[idx] = 4;
                else if (r < r_ed) mask.labels[idx] = 2;
            }
    save_mask(mask, (fs::path(out_dir) / (pid + "_mask.json")).string());

    const double roughness = label == 1 ? 60.0 : 15.0;
    for (const char* mod : {"T1", "T1C", "T2", "FLAIR"}) {
        Volume vol;
        vol.dims = dims;
        vol.spacing = {1.0, 1.0, 1.0};
        vol.modality = mod;
        vol.voxels.assign(dims.count(), 0.0);
        idx = 0;
        for (int z = 0; z < dim; ++z)
            for (int y = 0; y < dim; ++y)
                for (int x = 0; x < dim; ++x, ++idx) {
                    const double base = 100.0 + 2.0 * x + 1.0 * y + 0.5 * z;
                    double v = base + 5.0 * rng.normal();
                    if (mask.labels[idx] != 0) {
                        const double lift = mask.labels[idx] == 4 ? 80.0
                                            : mask.labels[idx] == 1 ? -40.0
                                                                    : 30.0;
                        v = base + lift + roughness * rng.normal();
                    }
                    vol.voxels[idx] = v;
                }
        save_volume(vol, (fs::path(out_dir) / (pid + "_" + mod + ".json")).string());
    }
}

} // namespace

void cmd_synth_classification(const PipelineConfig& config, const SynthClassificationParams& p,
                              const std::string& out_dir) {
    fs::create_directories(out_dir);
    if (!p.emit_volumes) {
        const LabeledDataset data = synth_classification_dataset(p, config.seed);
        write_feature_csv(data, (fs::path(out_dir) / "features.csv").string());
        return;
    }
    Rng rng(config.seed);
    LabeledDataset clinical;
    char buf[16];
    const int total = p.n_major + p.n_minor;
    for (int i = 0; i < total; ++i) {
        const int label = i < p.n_major ? 1 : 0;
        std::snprintf(buf, sizeof(buf), "P%04d", i + 1);
        synth_study_files(out_dir, buf, label, p.volume_dim, rng);
        clinical.patient_ids.push_back(buf);
        clinical.labels.push_back(label);
        clinical.time_days.push_back(0.0);
        clinical.censor.push_back(0);
        clinical.rows.emplace_back();
    }
    write_feature_csv(clinical, (fs::path(out_dir) / "clinical.csv").string());
}

void cmd_synth_survival(const PipelineConfig& config, const SynthSurvivalParams& p,
                        const std::string& out_dir) {
    fs::create_directories(out_dir);
    const SynthSurvivalResult r = synth_survival_dataset(p, config.seed);
    write_feature_csv(r.dataset, (fs::path(out_dir) / "features.csv").string());
    std::ofstream latent(fs::path(out_dir) / "latent.csv");
    if (!latent) throw io_error("cannot write latent.csv");
    latent << "patient_id,latent_T,latent_U\n";
    for (std::size_t i = 0; i < r.dataset.n_rows(); ++i)
        latent << r.dataset.patient_ids[i] << ',' << format_double(r.latent_t[i]) << ','
               << format_double(r.latent_u[i]) << '\n';
}

void cmd_report(const PipelineConfig& config, const std::string& features_csv,
                const std::string& out_dir) {
    fs::create_directories(out_dir);
    const LabeledDataset data = read_feature_csv(features_csv);
    json index;
    index["command"] = "report";
    index["config_hash"] = config_hash(config);
    index["seed"] = config.seed;
    index["source"] = fs::path(features_csv).filename().string();
    json artifacts = json::array();

    int n1 = 0;
    for (int l : data.labels) n1 += l;
    if (n1 > 0 && n1 < static_cast<int>(data.n_rows())) {
        const std::string path = (fs::path(out_dir) / "classify_report.json").string();
        cmd_classify(config, features_csv, path);
        artifacts.push_back("classify_report.json");
    }
    std::size_t usable = 0;
    int events = 0, censored = 0;
    for (std::size_t i = 0; i < data.n_rows(); ++i)
        if (data.time_days[i] > 0.0) {
            ++usable;
            (data.censor[i] == 1 ? events : censored) += 1;
        }
    if (usable >= 10 && events >= config.survival_folds && censored >= config.survival_folds) {
        const std::string dir = (fs::path(out_dir) / "survival").string();
        cmd_survival(config, features_csv, dir);
        for (const char* f : {"report.json", "cindex_curve.csv", "curves_dependent.csv",
                              "curves_independent.csv", "pi_groups.csv"})
            artifacts.push_back(std::string("survival/") + f);
    }
    index["artifacts"] = artifacts;
    write_json(index, (fs::path(out_dir) / "index.json").string());
}

} // namespace radiomics
