#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <sstream>
#include <string>

#include "radiomics/errors.hpp"
#include "radiomics/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct CliOptions {
    radiomics::PipelineConfig config;
    std::string config_file;
    std::string model = "mrf";
    std::string sampler = "rrs";
    std::string alpha_grid;
    std::string top_k;
    std::string ptpsa_scales;
    std::string holder_radii;
};

void add_common(CLI::App* cmd, CliOptions& opt) {
    cmd->add_option("--config", opt.config_file, "config file (key = value lines)");
    cmd->add_option("--seed", opt.config.seed, "master random seed");
    cmd->add_option("--threads", opt.config.threads, "worker thread cap");
}

bool has_flag(const CLI::App* cmd, const std::string& name) {
    const CLI::Option* o = cmd->get_option_no_throw(name);
    return o != nullptr && o->count() > 0;
}

void finalize(CliOptions& opt, const CLI::App* cmd) {
    if (!opt.config_file.empty()) radiomics::apply_config_file(opt.config, opt.config_file);
    // explicit flags override the config file
    if (has_flag(cmd, "--model")) opt.config.model = radiomics::feature_model_from_name(opt.model);
    if (has_flag(cmd, "--sampler")) opt.config.sampler = radiomics::sampler_from_name(opt.sampler);
    auto parse_doubles = [](const std::string& s) {
        std::vector<double> out;
        std::string item;
        std::stringstream ss(s);
        while (std::getline(ss, item, ','))
            if (!item.empty()) out.push_back(std::stod(item));
        return out;
    };
    if (has_flag(cmd, "--alpha-grid")) opt.config.alpha_grid = parse_doubles(opt.alpha_grid);
    if (has_flag(cmd, "--top-k")) {
        opt.config.top_k.clear();
        for (double v : parse_doubles(opt.top_k))
            opt.config.top_k.push_back(static_cast<int>(v));
    }
    if (has_flag(cmd, "--ptpsa-scales")) {
        opt.config.fractal.ptpsa_scales.clear();
        for (double v : parse_doubles(opt.ptpsa_scales))
            opt.config.fractal.ptpsa_scales.push_back(static_cast<int>(v));
    }
    if (has_flag(cmd, "--holder-radii")) {
        opt.config.fractal.holder_radii.clear();
        for (double v : parse_doubles(opt.holder_radii))
            opt.config.fractal.holder_radii.push_back(static_cast<int>(v));
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiresolution radiomics: feature extraction, imbalance-robust "
                 "classification, and dependent-censoring survival analysis"};
    app.require_subcommand(1);

    CliOptions opt;

    // extract
    auto* extract = app.add_subcommand("extract", "extract per-patient feature vectors to CSV");
    std::string out_csv = "features.csv";
    add_common(extract, opt);
    extract->add_option("--volumes", opt.config.volume_dir, "volume directory")->required();
    extract->add_option("--masks", opt.config.mask_dir, "mask directory (defaults to --volumes)");
    extract->add_option("--clinical", opt.config.clinical_csv,
                        "clinical CSV (patient_id,label,time_days,censor)")
        ->required();
    extract->add_option("--model", opt.model, "feature model: mrf | nfrf");
    extract->add_option("--ng", opt.config.ng, "gray levels for texture matrices");
    extract->add_option("--window", opt.config.fractal.window, "fractal window edge (odd)");
    extract->add_option("--ptpsa-scales", opt.ptpsa_scales, "comma list of PTPSA cell sizes");
    extract->add_option("--mbm-max-lag", opt.config.fractal.mbm_max_lag, "mBm maximum lag");
    extract->add_option("--holder-radii", opt.holder_radii, "comma list of oscillation radii");
    extract->add_option("--out", out_csv, "output feature CSV");

    // classify
    auto* classify = app.add_subcommand("classify", "feature selection + ensemble classification");
    std::string features_csv;
    std::string report_path = "classify_report.json";
    add_common(classify, opt);
    classify->add_option("--features", features_csv, "feature CSV")->required();
    classify->add_option("--model", opt.model, "feature model: mrf | nfrf");
    classify->add_option("--sampler", opt.sampler, "sampler: rrs | smote | adasyn");
    classify->add_option("--folds", opt.config.folds, "cross-validation folds");
    classify->add_option("--iterations", opt.config.iterations, "repeated CV iterations");
    classify->add_option("--trees", opt.config.gbdt.trees, "boosting rounds per member");
    classify->add_option("--depth", opt.config.gbdt.max_depth, "tree depth");
    classify->add_option("--learning-rate", opt.config.gbdt.learning_rate, "boosting shrinkage");
    classify->add_option("--out", report_path, "output report JSON");

    // survival
    auto* survival = app.add_subcommand("survival", "copula survival analysis pipeline");
    std::string survival_dir = "survival_out";
    add_common(survival, opt);
    survival->add_option("--features", features_csv, "feature CSV with time_days/censor")
        ->required();
    survival->add_option("--alpha-grid", opt.alpha_grid, "comma list of Clayton alphas");
    survival->add_option("--folds", opt.config.survival_folds, "c-index CV folds");
    survival->add_option("--permutations", opt.config.permutations,
                         "permutation count for the separation test");
    survival->add_option("--p-threshold", opt.config.survival_p_threshold,
                         "feature selection p threshold");
    survival->add_option("--top-k", opt.top_k, "comma list of top-k classification sizes");
    survival->add_option("--iterations", opt.config.iterations,
                         "repeated CV iterations for top-k classification");
    survival->add_option("--out", survival_dir, "output directory");

    // synth
    auto* synth = app.add_subcommand("synth", "generate synthetic verification datasets");
    std::string synth_kind = "classification";
    std::string synth_dir = "synth_out";
    radiomics::SynthClassificationParams cls_params;
    radiomics::SynthSurvivalParams surv_params;
    add_common(synth, opt);
    synth->add_option("--kind", synth_kind, "classification | survival")->required();
    synth->add_option("--out", synth_dir, "output directory");
    synth->add_option("--rows-major", cls_params.n_major, "majority rows (classification)");
    synth->add_option("--rows-minor", cls_params.n_minor, "minority rows (classification)");
    synth->add_option("--features", cls_params.n_features, "feature count");
    synth->add_option("--signal-features", cls_params.n_signal, "features carrying signal");
    synth->add_option("--separation", cls_params.separation, "class mean separation");
    synth->add_flag("--volumes", cls_params.emit_volumes, "emit volumes+masks instead of a CSV");
    synth->add_option("--dim", cls_params.volume_dim, "synthetic volume edge length");
    synth->add_option("--rows", surv_params.n, "rows (survival)");
    synth->add_option("--tau", surv_params.tau, "Kendall tau of (T, U) (survival)");
    synth->add_option("--beta", surv_params.beta, "planted coefficient magnitude (survival)");

    // report
    auto* report = app.add_subcommand("report", "bundle classify + survival outputs");
    std::string report_dir = "report_out";
    add_common(report, opt);
    report->add_option("--features", features_csv, "feature CSV")->required();
    report->add_option("--model", opt.model, "feature model: mrf | nfrf");
    report->add_option("--sampler", opt.sampler, "sampler: rrs | smote | adasyn");
    report->add_option("--folds", opt.config.folds, "cross-validation folds");
    report->add_option("--iterations", opt.config.iterations, "repeated CV iterations");
    report->add_option("--permutations", opt.config.permutations,
                       "permutation count for the separation test");
    report->add_option("--out", report_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (extract->parsed()) {
            finalize(opt, extract);
            const radiomics::ExtractSummary s = radiomics::cmd_extract(opt.config, out_csv);
            std::cerr << "extracted " << s.processed << " patients (" << s.skipped
                      << " skipped) -> " << out_csv << "\n";
        } else if (classify->parsed()) {
            finalize(opt, classify);
            radiomics::cmd_classify(opt.config, features_csv, report_path);
            std::cerr << "classification report -> " << report_path << "\n";
        } else if (survival->parsed()) {
            finalize(opt, survival);
            radiomics::cmd_survival(opt.config, features_csv, survival_dir);
            std::cerr << "survival outputs -> " << survival_dir << "\n";
        } else if (synth->parsed()) {
            finalize(opt, synth);
            if (synth_kind == "classification") {
                radiomics::cmd_synth_classification(opt.config, cls_params, synth_dir);
            } else if (synth_kind == "survival") {
                if (synth->count("--features"))
                    surv_params.n_features = cls_params.n_features;
                if (synth->count("--signal-features"))
                    surv_params.n_signal = cls_params.n_signal;
                radiomics::cmd_synth_survival(opt.config, surv_params, synth_dir);
            } else {
                std::cerr << "error: unknown synth kind '" << synth_kind << "'\n";
                return kExitUsage;
            }
            std::cerr << "synthetic dataset -> " << synth_dir << "\n";
        } else if (report->parsed()) {
            finalize(opt, report);
            radiomics::cmd_report(opt.config, features_csv, report_dir);
            std::cerr << "report bundle -> " << report_dir << "\n";
        }
    } catch (const radiomics::numeric_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const radiomics::io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const radiomics::data_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitOk;
}
