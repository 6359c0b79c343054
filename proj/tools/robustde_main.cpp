// robustde: model-robust direct effect estimation from tabular data.
//
// Subcommands: estimate, sensitivity, simulate, survey-bootstrap, expand.
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric
// error.

#include <CLI11.hpp>
#include <array>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "robustde/dataset.hpp"
#include "robustde/errors.hpp"
#include "robustde/estimator.hpp"
#include "robustde/report.hpp"
#include "robustde/rng.hpp"
#include "robustde/sensitivity.hpp"
#include "robustde/simulate.hpp"
#include "robustde/survey.hpp"

namespace {

using namespace robustde;

struct DataArgs {
    std::string csv;
    std::vector<std::string> x;
    std::string a, w, y;
    std::string weight, stratum, psu;
};

struct CommonArgs {
    int K = 5;
    std::uint64_t seed = 0;
    double clip_lo = 0.01;
    double clip_hi = 0.99;
    double alpha = 0.05;
    int threads = -1;  // -1: unset, fall back to ROBUSTDE_THREADS or 1
    std::string out;
    std::string format = "json";
};

void add_data_options(CLI::App* cmd, DataArgs& args, bool survey_required) {
    cmd->add_option("--csv", args.csv, "input CSV file")->required();
    cmd->add_option("--a", args.a, "exposure column (binary 0/1)")->required();
    cmd->add_option("--w", args.w, "focal variable column")->required();
    cmd->add_option("--y", args.y, "outcome column")->required();
    cmd->add_option("--x", args.x, "covariate columns")->delimiter(',');
    auto* weight =
        cmd->add_option("--weight", args.weight, "sampling weight column");
    auto* stratum = cmd->add_option("--stratum", args.stratum, "stratum column");
    auto* psu = cmd->add_option("--psu", args.psu, "PSU column");
    if (survey_required) {
        weight->required();
        stratum->required();
        psu->required();
    }
}

void add_common_options(CLI::App* cmd, CommonArgs& args, bool with_format) {
    cmd->add_option("--K", args.K, "number of cross-fitting folds (1 = plug-in)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", args.seed, "RNG seed")->required();
    cmd->add_option("--clip-lo", args.clip_lo, "lower propensity clip bound");
    cmd->add_option("--clip-hi", args.clip_hi, "upper propensity clip bound");
    cmd->add_option("--alpha", args.alpha, "two-sided test level");
    cmd->add_option("--threads", args.threads,
                    "worker threads (0 = hardware count)");
    cmd->add_option("--out", args.out, "output file (default: stdout)");
    if (with_format) {
        cmd->add_option("--format", args.format, "output format")
            ->check(CLI::IsMember({"json", "csv"}));
    }
}

int resolve_threads(int cli_value) {
    if (cli_value >= 0) {
        return cli_value;
    }
    if (const char* env = std::getenv("ROBUSTDE_THREADS")) {
        try {
            return std::max(0, std::stoi(env));
        } catch (const std::exception&) {
            throw ConfigError("ROBUSTDE_THREADS must be an integer");
        }
    }
    return 1;
}

EstimateOptions make_estimate_options(const CommonArgs& args) {
    EstimateOptions opts;
    opts.K = args.K;
    opts.seed = args.seed;
    opts.clip.lo = args.clip_lo;
    opts.clip.hi = args.clip_hi;
    opts.clip.validate();
    opts.alpha = args.alpha;
    return opts;
}

ColumnSpec make_column_spec(const DataArgs& args) {
    ColumnSpec spec;
    spec.x = args.x;
    spec.a = args.a;
    spec.w = args.w;
    spec.y = args.y;
    spec.weight = args.weight;
    spec.stratum = args.stratum;
    spec.psu = args.psu;
    return spec;
}

void write_output(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path);
    if (!out) {
        throw ConfigError("cannot open output file '" + out_path + "'");
    }
    out << text;
}

JsonValue config_json(const DataArgs& data, const CommonArgs& common) {
    JsonValue cfg = JsonValue::object();
    cfg.set("csv", JsonValue::string(data.csv));
    JsonValue x = JsonValue::array();
    for (const auto& name : data.x) {
        x.push_back(JsonValue::string(name));
    }
    cfg.set("x", std::move(x));
    cfg.set("a", JsonValue::string(data.a));
    cfg.set("w", JsonValue::string(data.w));
    cfg.set("y", JsonValue::string(data.y));
    if (!data.weight.empty()) {
        cfg.set("weight", JsonValue::string(data.weight));
    }
    if (!data.stratum.empty()) {
        cfg.set("stratum", JsonValue::string(data.stratum));
        cfg.set("psu", JsonValue::string(data.psu));
    }
    cfg.set("K", JsonValue::integer(common.K));
    cfg.set("seed", JsonValue::unsigned_integer(common.seed));
    cfg.set("clip_lo", JsonValue::number(common.clip_lo));
    cfg.set("clip_hi", JsonValue::number(common.clip_hi));
    cfg.set("alpha", JsonValue::number(common.alpha));
    return cfg;
}

JsonValue estimate_json(const EstimateResult& res) {
    JsonValue v = JsonValue::object();
    v.set("estimand", JsonValue::string(res.estimand));
    v.set("point", JsonValue::number(res.point));
    v.set("se", res.se ? JsonValue::number(*res.se) : JsonValue::null());
    v.set("ci_lo", res.ci_lo ? JsonValue::number(*res.ci_lo) : JsonValue::null());
    v.set("ci_hi", res.ci_hi ? JsonValue::number(*res.ci_hi) : JsonValue::null());
    v.set("n", JsonValue::unsigned_integer(res.n));
    v.set("K", JsonValue::integer(res.K));
    v.set("seed", JsonValue::unsigned_integer(res.seed));
    v.set("clip_lo", JsonValue::number(res.clip.lo));
    v.set("clip_hi", JsonValue::number(res.clip.hi));
    v.set("alpha", JsonValue::number(res.alpha));
    JsonValue warnings = JsonValue::array();
    for (const auto& msg : res.warnings) {
        warnings.push_back(JsonValue::string(msg));
    }
    v.set("warnings", std::move(warnings));
    return v;
}

// Flat one-row CSV mirror of the JSON fields for --format csv.
struct FlatRow {
    std::vector<std::pair<std::string, std::string>> cells;
    void add(const std::string& key, const std::string& value) {
        cells.emplace_back(key, value);
    }
    void add_estimate(const std::string& prefix, const EstimateResult& res) {
        add(prefix + "_point", format_double(res.point));
        add(prefix + "_se", res.se ? format_double(*res.se) : "");
        add(prefix + "_ci_lo", res.ci_lo ? format_double(*res.ci_lo) : "");
        add(prefix + "_ci_hi", res.ci_hi ? format_double(*res.ci_hi) : "");
    }
    std::string dump() const {
        std::ostringstream out;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            out << (i ? "," : "") << cells[i].first;
        }
        out << '\n';
        for (std::size_t i = 0; i < cells.size(); ++i) {
            out << (i ? "," : "") << cells[i].second;
        }
        out << '\n';
        return out.str();
    }
};

int cmd_estimate(const DataArgs& data, const CommonArgs& common,
                 bool with_lambda, bool with_union, int B) {
    const Dataset d = load_csv(data.csv, make_column_spec(data));
    const EstimateOptions opts = make_estimate_options(common);
    const EstimateResult psi = estimate_psi(d, opts);
    std::optional<EstimateResult> lambda;
    if (with_lambda || with_union) {
        lambda = estimate_lambda(d, opts);
    }
    std::optional<UnionTestResult> ut;
    if (with_union) {
        const double p_psi = wald_p(psi.point, *psi.se);
        const double p_lambda =
            comparator_bootstrap_p(d, B, derive_seed(common.seed, 0x626f6f74ull),
                                   opts);
        ut = union_test(p_psi, p_lambda, common.alpha);
    }
    for (const auto& msg : psi.warnings) {
        std::cerr << "warning: " << msg << '\n';
    }

    if (common.format == "csv") {
        FlatRow row;
        row.add("dropped_rows", std::to_string(d.dropped_rows));
        row.add_estimate("psi", psi);
        if (lambda) {
            row.add_estimate("lambda", *lambda);
        }
        if (ut) {
            row.add("union_p_psi", format_double(ut->p_psi));
            row.add("union_p_lambda", format_double(ut->p_lambda));
            row.add("union_p_max", format_double(ut->p_max));
            row.add("union_reject", ut->reject ? "true" : "false");
        }
        write_output(row.dump(), common.out);
        return 0;
    }

    JsonValue doc = JsonValue::object();
    doc.set("command", JsonValue::string("estimate"));
    doc.set("config", config_json(data, common));
    doc.set("dropped_rows", JsonValue::unsigned_integer(d.dropped_rows));
    doc.set("psi", estimate_json(psi));
    if (lambda) {
        doc.set("lambda", estimate_json(*lambda));
    }
    if (ut) {
        JsonValue uj = JsonValue::object();
        uj.set("p_psi", JsonValue::number(ut->p_psi));
        uj.set("p_lambda", JsonValue::number(ut->p_lambda));
        uj.set("p_max", JsonValue::number(ut->p_max));
        uj.set("reject", JsonValue::boolean(ut->reject));
        uj.set("alpha", JsonValue::number(ut->alpha));
        uj.set("B", JsonValue::integer(B));
        doc.set("union", std::move(uj));
    }
    write_output(doc.dump(), common.out);
    return 0;
}

int cmd_sensitivity(const DataArgs& data, const CommonArgs& common,
                    std::optional<double> gamma, const std::string& sweep) {
    const Dataset d = load_csv(data.csv, make_column_spec(data));
    SensitivityOptions opts;
    opts.gamma = gamma;
    opts.estimate = make_estimate_options(common);
    const SensitivityReport report = sensitivity_report(d, opts);

    std::vector<std::array<double, 3>> sweep_rows;
    if (!sweep.empty()) {
        double lo = 0.0, hi = 0.0, step = 0.0;
        char c1 = 0, c2 = 0;
        std::istringstream in(sweep);
        in >> lo >> c1 >> hi >> c2 >> step;
        if (!in || c1 != ':' || c2 != ':' || step <= 0.0 || hi < lo) {
            throw ConfigError("--sweep expects lo:hi:step with step > 0");
        }
        for (double g = lo; g <= hi + 1e-12; g += step) {
            const auto interval = bound(report.psi.point, g, report.e_tv);
            sweep_rows.push_back({g, interval.first, interval.second});
        }
    }

    if (common.format == "csv") {
        std::ostringstream out;
        if (!sweep_rows.empty()) {
            out << "gamma,lo,hi\n";
            for (const auto& row : sweep_rows) {
                out << format_double(row[0]) << ',' << format_double(row[1])
                    << ',' << format_double(row[2]) << '\n';
            }
        } else {
            FlatRow row;
            row.add("dropped_rows", std::to_string(d.dropped_rows));
            row.add_estimate("psi", report.psi);
            row.add("gamma", format_double(report.gamma));
            row.add("gamma_source", report.gamma_supplied ? "supplied" : "fit");
            row.add("e_tv", format_double(report.e_tv));
            row.add("gap", report.gap ? format_double(*report.gap) : "");
            row.add("bound_lo", format_double(report.lo));
            row.add("bound_hi", format_double(report.hi));
            out << row.dump();
        }
        write_output(out.str(), common.out);
        return 0;
    }

    JsonValue doc = JsonValue::object();
    doc.set("command", JsonValue::string("sensitivity"));
    JsonValue cfg = config_json(data, common);
    if (gamma) {
        cfg.set("gamma", JsonValue::number(*gamma));
    }
    if (!sweep.empty()) {
        cfg.set("sweep", JsonValue::string(sweep));
    }
    doc.set("config", std::move(cfg));
    doc.set("dropped_rows", JsonValue::unsigned_integer(d.dropped_rows));
    doc.set("psi", estimate_json(report.psi));
    doc.set("gamma", JsonValue::number(report.gamma));
    doc.set("gamma_source",
            JsonValue::string(report.gamma_supplied ? "supplied" : "fit"));
    doc.set("e_tv", JsonValue::number(report.e_tv));
    doc.set("gap", report.gap ? JsonValue::number(*report.gap) : JsonValue::null());
    JsonValue interval = JsonValue::object();
    interval.set("lo", JsonValue::number(report.lo));
    interval.set("hi", JsonValue::number(report.hi));
    doc.set("bound", std::move(interval));
    if (!sweep_rows.empty()) {
        JsonValue arr = JsonValue::array();
        for (const auto& row : sweep_rows) {
            JsonValue item = JsonValue::object();
            item.set("gamma", JsonValue::number(row[0]));
            item.set("lo", JsonValue::number(row[1]));
            item.set("hi", JsonValue::number(row[2]));
            arr.push_back(std::move(item));
        }
        doc.set("sweep", std::move(arr));
    }
    write_output(doc.dump(), common.out);
    return 0;
}

int cmd_simulate(const CommonArgs& common, const std::vector<int>& cases,
                 const std::vector<std::size_t>& ns, int reps,
                 const std::string& out_dir) {
    StudyConfig cfg;
    cfg.cases = cases;
    cfg.sample_sizes = ns;
    cfg.reps = reps;
    cfg.K = common.K;
    cfg.seed = common.seed;
    cfg.clip.lo = common.clip_lo;
    cfg.clip.hi = common.clip_hi;
    cfg.clip.validate();
    cfg.alpha = common.alpha;
    cfg.threads = resolve_threads(common.threads);

    std::vector<ReplicateRecord> records;
    const std::vector<SimSummary> summaries = run_study(cfg, &records);

    std::filesystem::create_directories(out_dir);
    const std::string summary_path = out_dir + "/summary.csv";
    const std::string estimates_path = out_dir + "/estimates.csv";
    const std::string reference_path = out_dir + "/reference_lines.csv";
    {
        std::ofstream out(summary_path);
        if (!out) throw ConfigError("cannot write '" + summary_path + "'");
        write_study_summary(summaries, out);
    }
    {
        std::ofstream out(estimates_path);
        if (!out) throw ConfigError("cannot write '" + estimates_path + "'");
        write_replicate_records(records, out);
    }
    {
        std::ofstream out(reference_path);
        if (!out) throw ConfigError("cannot write '" + reference_path + "'");
        write_reference_lines(summaries, out);
    }

    JsonValue doc = JsonValue::object();
    doc.set("command", JsonValue::string("simulate"));
    JsonValue cfg_json = JsonValue::object();
    JsonValue case_arr = JsonValue::array();
    for (int c : cases) case_arr.push_back(JsonValue::integer(c));
    cfg_json.set("cases", std::move(case_arr));
    JsonValue n_arr = JsonValue::array();
    for (std::size_t n : ns) n_arr.push_back(JsonValue::unsigned_integer(n));
    cfg_json.set("ns", std::move(n_arr));
    cfg_json.set("reps", JsonValue::integer(reps));
    cfg_json.set("K", JsonValue::integer(common.K));
    cfg_json.set("seed", JsonValue::unsigned_integer(common.seed));
    cfg_json.set("clip_lo", JsonValue::number(common.clip_lo));
    cfg_json.set("clip_hi", JsonValue::number(common.clip_hi));
    cfg_json.set("alpha", JsonValue::number(common.alpha));
    doc.set("config", std::move(cfg_json));
    JsonValue outputs = JsonValue::array();
    outputs.push_back(JsonValue::string(summary_path));
    outputs.push_back(JsonValue::string(estimates_path));
    outputs.push_back(JsonValue::string(reference_path));
    doc.set("outputs", std::move(outputs));
    doc.set("cells", JsonValue::unsigned_integer(summaries.size()));
    write_output(doc.dump(), common.out);
    return 0;
}

int cmd_survey_bootstrap(const DataArgs& data, const CommonArgs& common,
                         int B, const std::vector<std::string>& target_names) {
    const Dataset d = load_csv(data.csv, make_column_spec(data));
    BootstrapOptions opts;
    opts.B = B;
    opts.seed = common.seed;
    opts.estimate = make_estimate_options(common);
    opts.threads = resolve_threads(common.threads);
    opts.targets.clear();
    for (const auto& name : target_names) {
        if (name == "psi") {
            opts.targets.push_back(BootTarget::psi);
        } else if (name == "lambda") {
            opts.targets.push_back(BootTarget::lambda);
        } else if (name == "difference") {
            opts.targets.push_back(BootTarget::difference);
        } else {
            throw ConfigError("unknown bootstrap target '" + name + "'");
        }
    }

    const BootstrapResult boot = psu_bootstrap(d, opts);

    bool want_psi = false;
    for (BootTarget t : opts.targets) {
        if (t == BootTarget::psi) want_psi = true;
    }
    std::optional<WeightedPsiResult> design_psi;
    if (want_psi) {
        design_psi = estimate_psi_weighted(d, opts.estimate);
        for (const auto& msg : design_psi->estimate.warnings) {
            std::cerr << "warning: " << msg << '\n';
        }
    }

    JsonValue doc = JsonValue::object();
    doc.set("command", JsonValue::string("survey-bootstrap"));
    JsonValue cfg = config_json(data, common);
    cfg.set("B", JsonValue::integer(B));
    JsonValue tnames = JsonValue::array();
    for (BootTarget t : opts.targets) {
        tnames.push_back(JsonValue::string(target_name(t)));
    }
    cfg.set("targets", std::move(tnames));
    doc.set("config", std::move(cfg));
    doc.set("dropped_rows", JsonValue::unsigned_integer(d.dropped_rows));

    JsonValue targets = JsonValue::array();
    for (const TargetSummary& ts : boot.targets) {
        JsonValue tj = JsonValue::object();
        tj.set("target", JsonValue::string(target_name(ts.target)));
        tj.set("point", JsonValue::number(ts.point));
        if (ts.target == BootTarget::psi && design_psi) {
            tj.set("design_se", JsonValue::number(*design_psi->estimate.se));
            tj.set("design_ci_lo",
                   JsonValue::number(*design_psi->estimate.ci_lo));
            tj.set("design_ci_hi",
                   JsonValue::number(*design_psi->estimate.ci_hi));
            tj.set("lonely_psu_strata",
                   JsonValue::integer(design_psi->lonely_psu_strata));
        }
        tj.set("boot_ci_lo", JsonValue::number(ts.ci_lo));
        tj.set("boot_ci_hi", JsonValue::number(ts.ci_hi));
        tj.set("replicates", JsonValue::integer(
                                 static_cast<std::int64_t>(ts.replicates.size())));
        targets.push_back(std::move(tj));
    }
    doc.set("targets", std::move(targets));
    doc.set("B", JsonValue::integer(boot.B));
    doc.set("skipped", JsonValue::integer(boot.skipped));
    write_output(doc.dump(), common.out);
    return 0;
}

int cmd_expand(const std::string& csv, const std::vector<std::string>& cats,
               const std::string& out_path) {
    const CsvTable table = read_csv_table_file(csv);
    const CsvTable expanded = expand_categorical(table, cats);
    std::ostringstream out;
    write_csv_table(expanded, out);
    write_output(out.str(), out_path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"model-robust direct effect estimation"};
    app.require_subcommand(1);

    DataArgs est_data;
    CommonArgs est_common;
    bool est_lambda = false, est_union = false;
    int est_B = 500;
    auto* est = app.add_subcommand(
        "estimate", "cross-fitted doubly robust estimate from a CSV");
    add_data_options(est, est_data, false);
    add_common_options(est, est_common, true);
    est->add_flag("--lambda", est_lambda, "also report the comparator");
    est->add_flag("--union", est_union,
                  "run the intersection-union test (implies --lambda)");
    est->add_option("--B", est_B, "bootstrap replicates for the union test")
        ->check(CLI::PositiveNumber);

    DataArgs sens_data;
    CommonArgs sens_common;
    double sens_gamma = -1.0;
    bool sens_gamma_set = false;
    std::string sens_sweep;
    auto* sens = app.add_subcommand(
        "sensitivity", "bound interval under focal-model perturbations");
    add_data_options(sens, sens_data, false);
    add_common_options(sens, sens_common, true);
    sens->add_option("--gamma", sens_gamma,
                     "effect-range constant (default: |A:W| coefficient)")
        ->each([&](const std::string&) { sens_gamma_set = true; });
    sens->add_option("--sweep", sens_sweep, "grid lo:hi:step of gamma values");

    CommonArgs sim_common;
    std::vector<int> sim_cases{1, 2, 3};
    std::vector<std::size_t> sim_ns{500, 2000};
    int sim_reps = 500;
    std::string sim_out_dir;
    auto* sim = app.add_subcommand(
        "simulate", "replicate study over the built-in generating processes");
    add_common_options(sim, sim_common, false);
    sim->add_option("--cases", sim_cases, "cases to run")->delimiter(',');
    sim->add_option("--ns", sim_ns, "sample sizes")->delimiter(',');
    sim->add_option("--reps", sim_reps, "replicates per cell")
        ->check(CLI::PositiveNumber);
    sim->add_option("--out-dir", sim_out_dir, "directory for result CSVs")
        ->required();

    DataArgs boot_data;
    CommonArgs boot_common;
    int boot_B = 500;
    std::vector<std::string> boot_targets{"psi", "lambda", "difference"};
    auto* boot = app.add_subcommand(
        "survey-bootstrap", "stratified PSU bootstrap for weighted samples");
    add_data_options(boot, boot_data, true);
    add_common_options(boot, boot_common, false);
    boot->add_option("--B", boot_B, "bootstrap replicates")
        ->check(CLI::PositiveNumber);
    boot->add_option("--targets", boot_targets, "targets to bootstrap")
        ->delimiter(',');

    std::string exp_csv, exp_out;
    std::vector<std::string> exp_cats;
    auto* exp = app.add_subcommand(
        "expand", "dummy-code categorical columns of a CSV");
    exp->add_option("--csv", exp_csv, "input CSV file")->required();
    exp->add_option("--categorical", exp_cats, "columns to expand")
        ->delimiter(',')
        ->required();
    exp->add_option("--out", exp_out, "output file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (est->parsed()) {
            return cmd_estimate(est_data, est_common, est_lambda, est_union,
                                est_B);
        }
        if (sens->parsed()) {
            return cmd_sensitivity(
                sens_data, sens_common,
                sens_gamma_set ? std::optional<double>(sens_gamma)
                               : std::nullopt,
                sens_sweep);
        }
        if (sim->parsed()) {
            return cmd_simulate(sim_common, sim_cases, sim_ns, sim_reps,
                                sim_out_dir);
        }
        if (boot->parsed()) {
            return cmd_survey_bootstrap(boot_data, boot_common, boot_B,
                                        boot_targets);
        }
        if (exp->parsed()) {
            return cmd_expand(exp_csv, exp_cats, exp_out);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
