#include "vecq/cli.hpp"

#include "vecq/baselines.hpp"
#include "vecq/datasets.hpp"
#include "vecq/density.hpp"
#include "vecq/error.hpp"
#include "vecq/io.hpp"
#include "vecq/lambda_template.hpp"
#include "vecq/quantizer.hpp"
#include "vecq/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

namespace vecq::cli {

Method parse_method(const std::string& text) {
    if (text == "vecq") return Method::VecQ;
    if (text == "iterative-l2") return Method::IterativeL2;
    if (text == "sign-binary") return Method::SignBinary;
    if (text == "linear-round") return Method::LinearRound;
    fail(ErrorCode::InvalidArgument, "unknown method '" + text + "'");
}

std::string method_name(Method method) {
    switch (method) {
        case Method::VecQ: return "vecq";
        case Method::IterativeL2: return "iterative-l2";
        case Method::SignBinary: return "sign-binary";
        case Method::LinearRound: return "linear-round";
    }
    return "?";
}

LambdaMode parse_lambda_mode(const std::string& text) {
    if (text == "template") return {LambdaMode::Kind::Template, 0.0};
    if (text == "empirical") return {LambdaMode::Kind::Empirical, 0.0};
    const std::string prefix = "fixed:";
    if (text.rfind(prefix, 0) == 0) {
        const std::string number = text.substr(prefix.size());
        char* end = nullptr;
        const double v = std::strtod(number.c_str(), &end);
        if (number.empty() || *end != '\0' || !(v > 0.0) || !std::isfinite(v)) {
            fail(ErrorCode::InvalidArgument, "fixed lambda must be a positive number");
        }
        return {LambdaMode::Kind::Fixed, v};
    }
    fail(ErrorCode::InvalidArgument, "lambda mode must be template, empirical or fixed:<value>");
}

QuantizerSpec make_spec(Method method, int bits, LambdaMode mode) {
    QuantizerSpec spec{method, bits, mode};
    if (method == Method::SignBinary) spec.bits = 1;
    check_bits(spec.bits);
    if (method == Method::LinearRound && spec.bits < 2) {
        fail(ErrorCode::InvalidArgument, "linear-round needs at least 2 bits");
    }
    if (method != Method::VecQ && mode.kind != LambdaMode::Kind::Template) {
        fail(ErrorCode::InvalidArgument, "lambda mode only applies to vecq");
    }
    return spec;
}

unsigned thread_budget() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* cap = std::getenv("VECQ_THREADS")) {
        const long v = std::strtol(cap, nullptr, 10);
        if (v > 0) n = std::min<unsigned>(n, static_cast<unsigned>(v));
    }
    return n;
}

namespace {

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument:
            return kUsage;
        case ErrorCode::Io:
        case ErrorCode::BadMagic:
        case ErrorCode::UnsupportedDtype:
        case ErrorCode::TruncatedPayload:
        case ErrorCode::CrcMismatch:
        case ErrorCode::MalformedJson:
        case ErrorCode::CorruptDataset:
            return kIo;
        default:
            return kNumeric;
    }
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

double significant6(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return std::strtod(buf, nullptr);
}

std::vector<double> parse_number_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        char* end = nullptr;
        const double v = std::strtod(item.c_str(), &end);
        if (item.empty() || *end != '\0') fail(ErrorCode::InvalidArgument, "bad number '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) fail(ErrorCode::InvalidArgument, "empty number list");
    return out;
}

// "start:stop:step" or a comma-separated list.
std::vector<double> parse_grid(const std::string& text) {
    if (text.find(':') == std::string::npos) return parse_number_list(text);
    std::string spec = text;
    std::replace(spec.begin(), spec.end(), ':', ',');
    const auto parts = parse_number_list(spec);
    if (parts.size() != 3 || !(parts[2] > 0.0) || !(parts[1] >= parts[0])) {
        fail(ErrorCode::InvalidArgument, "grid must be start:stop:step with step > 0");
    }
    std::vector<double> grid;
    for (long i = 0;; ++i) {
        const double v = parts[0] + static_cast<double>(i) * parts[2];
        if (v > parts[1] + 1e-9 * parts[2]) break;
        grid.push_back(v);
    }
    return grid;
}

// Writes to the file when a path is given, otherwise to `fallback`.
void emit(const std::string& path, const std::string& text, std::ostream& fallback) {
    if (path.empty()) {
        fallback << text;
    } else {
        write_text_file(path, text);
    }
}

// --- template ---------------------------------------------------------------

struct TemplateArgs {
    int k_min = 1;
    int k_max = 8;
    std::string out;
    std::string mode = "solve";
};

int cmd_template(const TemplateArgs& a, std::ostream& out, std::ostream& err) {
    if (a.k_min < 1 || a.k_max > kMaxBits || a.k_min > a.k_max) {
        fail(ErrorCode::InvalidArgument, "need 1 <= k-min <= k-max <= 30");
    }
    const bool solve = a.mode == "solve";
    if (!solve && a.mode != "reference") fail(ErrorCode::InvalidArgument, "mode must be solve or reference");

    const LambdaTemplate& reference = LambdaTemplate::reference();
    nlohmann::json table = nlohmann::json::array();
    err << "k  lambda      reference   diff\n";
    for (int k = a.k_min; k <= a.k_max; ++k) {
        const double lambda = solve ? solve_lambda(k) : reference.at(k);
        table.push_back({{"k", k}, {"lambda", significant6(lambda)}});
        char line[128];
        if (k == 1) {
            std::snprintf(line, sizeof line, "%-2d %-11.6f (0,inf)     lambda free, set to 1\n", k, lambda);
        } else if (k > kMaxTableBits) {
            std::snprintf(line, sizeof line, "%-2d %-11.6f 6/2^k\n", k, lambda);
        } else {
            const double ref = reference.at(k);
            std::snprintf(line, sizeof line, "%-2d %-11.6f %-11.4f %+.6f\n", k, lambda, ref, lambda - ref);
        }
        err << line;
    }
    emit(a.out, table.dump() + "\n", out);
    return kOk;
}

// --- quantize ---------------------------------------------------------------

struct QuantizeArgs {
    std::string in;
    std::string method = "vecq";
    int bits = 2;
    std::string lambda_mode = "template";
    std::string out;
    std::string codes;
    std::string report;
    std::string name;
    int max_iters = 1000;
    std::optional<double> alpha0;
};

QuantResult run_method(const QuantizerSpec& spec, std::span<const double> w,
                       const IterativeOptions& iterative, int* iterations = nullptr) {
    auto record = [&](const BaselineResult& b) {
        if (iterations) *iterations = b.iterations;
        return b.result;
    };
    if (iterations) *iterations = 1;
    switch (spec.method) {
        case Method::VecQ:
            switch (spec.lambda_mode.kind) {
                case LambdaMode::Kind::Template:
                    return quantize(w, spec.bits);
                case LambdaMode::Kind::Empirical:
                    return quantize_fixed_lambda(w, spec.bits,
                                                 empirical_lambda(w, spec.bits) * stats(w).stddev());
                case LambdaMode::Kind::Fixed:
                    return quantize_fixed_lambda(w, spec.bits, spec.lambda_mode.value);
            }
            break;
        case Method::IterativeL2:
            return record(iterative_l2(w, spec.bits, iterative));
        case Method::SignBinary:
            return record(sign_binary(w));
        case Method::LinearRound:
            return record(linear_round(w, spec.bits));
    }
    fail(ErrorCode::InvalidArgument, "unhandled method");
}

int cmd_quantize(const QuantizeArgs& a, std::ostream& out, std::ostream&) {
    const QuantizerSpec spec = make_spec(parse_method(a.method), a.bits, parse_lambda_mode(a.lambda_mode));
    const Tensor input = read_tensor(a.in);
    const WeightVector w = flatten(input);

    IterativeOptions iterative;
    iterative.max_iters = a.max_iters;
    iterative.initial_alpha = a.alpha0;
    const QuantResult result = run_method(spec, w, iterative);

    if (!a.out.empty()) write_tensor(a.out, unflatten(result.reconstructed, input.shape()));
    if (!a.codes.empty()) write_tensor(a.codes, unflatten(result.codes.codes, input.shape()));

    QuantReport report;
    const std::string name = a.name.empty() ? std::filesystem::path(a.in).stem().string() : a.name;
    report.layers.push_back(make_layer_record(name, result));
    const std::string json = report_to_json(report);
    if (!a.report.empty()) write_text_file(a.report, json);
    out << json << '\n';
    return kOk;
}

// --- compare ----------------------------------------------------------------

struct CompareArgs {
    std::string in;
    std::string bits = "2";
    std::string methods = "vecq,iterative-l2,sign-binary,linear-round";
    int trials = 1;
    std::uint64_t seed = 1;
    std::size_t dim = 1024;
    std::string levels;
    std::optional<double> alpha0;
    int max_iters = 1000;
    std::string out;
    std::string summary;
};

struct CompareRow {
    int trial = 0;
    int bits = 0;
    std::string method;
    QuantResult result;
    int iterations = 1;
};

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

int cmd_compare(const CompareArgs& a, std::ostream& out, std::ostream& err) {
    if (a.trials < 1) fail(ErrorCode::InvalidArgument, "trials must be >= 1");
    if (a.dim < 1) fail(ErrorCode::InvalidArgument, "dim must be >= 1");
    std::vector<int> bit_list;
    for (double b : parse_number_list(a.bits)) {
        bit_list.push_back(static_cast<int>(b));
        check_bits(bit_list.back());
    }
    std::vector<Method> methods;
    {
        std::stringstream ss(a.methods);
        std::string item;
        while (std::getline(ss, item, ',')) methods.push_back(parse_method(item));
        if (methods.empty()) fail(ErrorCode::InvalidArgument, "no methods given");
    }
    std::vector<double> levels;
    if (!a.levels.empty()) levels = parse_number_list(a.levels);

    std::optional<WeightVector> fixed_input;
    if (!a.in.empty()) fixed_input = flatten(read_tensor(a.in));
    const int trials = fixed_input ? 1 : a.trials;

    // Invalid method/bit combinations are skipped up front.
    struct Job {
        int bits;
        Method method;
    };
    std::vector<Job> jobs;
    for (int bits : bit_list) {
        for (Method m : methods) {
            if (m == Method::LinearRound && bits < 2) {
                err << "skipping linear-round at k=" << bits << " (needs k >= 2)\n";
                continue;
            }
            jobs.push_back({bits, m});
        }
    }

    std::vector<std::vector<CompareRow>> per_trial(static_cast<std::size_t>(trials));
    auto run_trial = [&](int t) {
        WeightVector w;
        if (fixed_input) {
            w = *fixed_input;
        } else {
            std::mt19937_64 rng(splitmix64(a.seed + static_cast<std::uint64_t>(t)));
            std::normal_distribution<double> gauss(0.0, 1.0);
            w.resize(a.dim);
            for (double& x : w) x = gauss(rng);
        }
        auto& rows = per_trial[static_cast<std::size_t>(t)];
        for (const Job& job : jobs) {
            CompareRow row{t, job.bits, method_name(job.method), {}, 1};
            IterativeOptions iterative;
            iterative.max_iters = a.max_iters;
            iterative.initial_alpha = a.alpha0;
            iterative.levels = levels;
            if (job.method == Method::VecQ && !levels.empty()) {
                row.result = select_codes_by_orientation(w, levels);
            } else {
                const QuantizerSpec spec = make_spec(job.method, job.bits, {});
                row.result = run_method(spec, w, iterative, &row.iterations);
            }
            rows.push_back(std::move(row));
        }
    };

    const unsigned workers = std::min<unsigned>(thread_budget(), static_cast<unsigned>(trials));
    if (workers <= 1) {
        for (int t = 0; t < trials; ++t) run_trial(t);
    } else {
        std::vector<std::exception_ptr> errors(workers);
        std::vector<std::jthread> pool;
        for (unsigned id = 0; id < workers; ++id) {
            pool.emplace_back([&, id] {
                try {
                    for (int t = static_cast<int>(id); t < trials; t += static_cast<int>(workers)) run_trial(t);
                } catch (...) {
                    errors[id] = std::current_exception();
                }
            });
        }
        pool.clear();
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    std::ostringstream csv;
    csv << "trial,bits,method,lambda,alpha,J_o,J_m,J_v,J_l2,iterations\n";
    std::map<int, std::pair<int, int>> wins;  // bits -> (wins, paired trials)
    for (const auto& rows : per_trial) {
        std::map<int, std::pair<std::optional<double>, std::optional<double>>> pair;
        for (const auto& r : rows) {
            csv << r.trial << ',' << r.bits << ',' << r.method << ',' << fmt(r.result.lambda) << ','
                << fmt(r.result.alpha) << ',' << fmt(r.result.loss_orientation) << ','
                << fmt(r.result.loss_modulus) << ',' << fmt(r.result.loss_vector) << ','
                << fmt(r.result.loss_l2) << ',' << r.iterations << '\n';
            if (r.method == "vecq" && !pair[r.bits].first) pair[r.bits].first = r.result.loss_l2;
            if (r.method == "iterative-l2" && !pair[r.bits].second) pair[r.bits].second = r.result.loss_l2;
        }
        for (const auto& [bits, p] : pair) {
            if (p.first && p.second) {
                auto& w = wins[bits];
                w.second += 1;
                if (*p.first <= *p.second) w.first += 1;
            }
        }
    }
    emit(a.out, csv.str(), out);

    nlohmann::json summary = {{"trials", trials}, {"win_or_tie_rate", nlohmann::json::object()}};
    for (const auto& [bits, w] : wins) {
        const double rate = static_cast<double>(w.first) / static_cast<double>(w.second);
        summary["win_or_tie_rate"][std::to_string(bits)] = rate;
        err << "k=" << bits << ": vecq J_l2 <= iterative-l2 J_l2 in " << w.first << "/" << w.second
            << " trials (" << fmt(rate) << ")\n";
    }
    if (!a.summary.empty()) write_text_file(a.summary, summary.dump() + "\n");
    return kOk;
}

// --- curve ------------------------------------------------------------------

struct CurveArgs {
    int k = 2;
    std::string grid = "0.01:3:0.01";
    std::string out;
};

int cmd_curve(const CurveArgs& a, std::ostream& out, std::ostream&) {
    const auto grid = parse_grid(a.grid);
    const OrientationCurve c = curve(a.k, grid);
    std::ostringstream csv;
    csv << "lambda,J_o\n";
    for (const auto& [lambda, loss] : c.samples) csv << fmt(lambda) << ',' << fmt(loss) << '\n';
    emit(a.out, csv.str(), out);
    return kOk;
}

// --- train ------------------------------------------------------------------

struct TrainArgs {
    std::string config;
    std::string out;
};

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
    const TrainConfig config = train_config_from_json(read_text_file(a.config));
    const TrainReport report = train_demo(config);
    std::ostringstream lines;
    write_metrics_jsonl(lines, report);
    emit(a.out, lines.str(), out);
    for (const auto& s : report.settings) {
        err << s.setting.label() << ": train " << fmt(s.final_train_accuracy) << " test "
            << fmt(s.final_test_accuracy) << '\n';
    }
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"VecQ weight quantization toolkit", "vecq"};
    app.require_subcommand(1);

    TemplateArgs template_args;
    auto* tmpl = app.add_subcommand("template", "Generate the optimal lambda table");
    tmpl->add_option("--k-min", template_args.k_min, "Smallest bitwidth")->capture_default_str();
    tmpl->add_option("--k-max", template_args.k_max, "Largest bitwidth")->capture_default_str();
    tmpl->add_option("--out", template_args.out, "Output JSON path (stdout if omitted)");
    tmpl->add_option("--mode", template_args.mode, "solve (regenerate) or reference (baked-in constants)")
        ->capture_default_str();

    QuantizeArgs quantize_args;
    auto* quant = app.add_subcommand("quantize", "Quantize a stored tensor");
    quant->add_option("--in", quantize_args.in, "Input tensor file")->required();
    quant->add_option("--method", quantize_args.method, "vecq | iterative-l2 | sign-binary | linear-round")
        ->capture_default_str();
    quant->add_option("--bits", quantize_args.bits, "Bitwidth k")->capture_default_str();
    quant->add_option("--lambda-mode", quantize_args.lambda_mode, "template | empirical | fixed:<value>")
        ->capture_default_str();
    quant->add_option("--out", quantize_args.out, "Reconstructed tensor output path");
    quant->add_option("--codes", quantize_args.codes, "Code vector output path");
    quant->add_option("--report", quantize_args.report, "Report JSON output path");
    quant->add_option("--name", quantize_args.name, "Layer name in the report");
    quant->add_option("--max-iters", quantize_args.max_iters, "iterative-l2 step cap")->capture_default_str();
    quant->add_option("--alpha0", quantize_args.alpha0, "iterative-l2 initial scale");

    CompareArgs compare_args;
    auto* cmp = app.add_subcommand("compare", "Compare quantizers over paired trials");
    cmp->add_option("--in", compare_args.in, "Input tensor (synthetic unit-normal vectors if omitted)");
    cmp->add_option("--bits", compare_args.bits, "Comma-separated bitwidths")->capture_default_str();
    cmp->add_option("--methods", compare_args.methods, "Comma-separated methods")->capture_default_str();
    cmp->add_option("--trials", compare_args.trials, "Number of synthetic trials")->capture_default_str();
    cmp->add_option("--seed", compare_args.seed, "Master seed")->capture_default_str();
    cmp->add_option("--dim", compare_args.dim, "Synthetic vector length")->capture_default_str();
    cmp->add_option("--levels", compare_args.levels, "Explicit integer level set, e.g. -1,0,1,2");
    cmp->add_option("--alpha0", compare_args.alpha0, "iterative-l2 initial scale");
    cmp->add_option("--max-iters", compare_args.max_iters, "iterative-l2 step cap")->capture_default_str();
    cmp->add_option("--out", compare_args.out, "CSV output path (stdout if omitted)");
    cmp->add_option("--summary", compare_args.summary, "Win-rate summary JSON path");

    CurveArgs curve_args;
    auto* crv = app.add_subcommand("curve", "Export the orientation-loss curve");
    crv->add_option("--k", curve_args.k, "Bitwidth")->required();
    crv->add_option("--grid", curve_args.grid, "start:stop:step or comma list")->capture_default_str();
    crv->add_option("--out", curve_args.out, "CSV output path (stdout if omitted)");

    TrainArgs train_args;
    auto* trn = app.add_subcommand("train", "Run the quantized training demo");
    trn->add_option("--config", train_args.config, "Training config JSON")->required();
    trn->add_option("--out", train_args.out, "JSON-lines metrics path (stdout if omitted)");

    std::vector<std::string> storage = {"vecq"};
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : storage) argv.push_back(s.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kUsage;
    }

    try {
        if (*tmpl) return cmd_template(template_args, out, err);
        if (*quant) return cmd_quantize(quantize_args, out, err);
        if (*cmp) return cmd_compare(compare_args, out, err);
        if (*crv) return cmd_curve(curve_args, out, err);
        if (*trn) return cmd_train(train_args, out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kNumeric;
    }
    return kUsage;
}

}  // namespace vecq::cli
