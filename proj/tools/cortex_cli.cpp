// cortex: run experiments, inspect exported artifacts, summarize runs.
//
//   cortex run [--config FILE] [--<key> VALUE ...] [--out DIR]
//   cortex inspect PATH
//   cortex stats DIR
//
// The output directory defaults to $CORTEX_OUT, then ./cortex-out.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "cortex/harness.hpp"

namespace fs = std::filesystem;
using namespace cortex;

namespace {

constexpr int kUsageError = 1;

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> split_line(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, sep)) out.push_back(cell);
    return out;
}

/// Header-keyed CSV rows.
std::vector<std::map<std::string, std::string>> read_table(const fs::path& path) {
    std::istringstream in(slurp(path));
    std::string line;
    std::vector<std::map<std::string, std::string>> rows;
    if (!std::getline(in, line)) return rows;
    const auto header = split_line(line, ',');
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_line(line, ',');
        auto& row = rows.emplace_back();
        for (std::size_t i = 0; i < header.size() && i < cells.size(); ++i) row[header[i]] = cells[i];
    }
    return rows;
}

int run_command(const std::string& config_file, const std::map<std::string, std::string>& overrides,
                std::string out_dir) {
    ExperimentConfig config;
    try {
        if (!config_file.empty()) config = parse_config(slurp(config_file));
        for (const auto& [key, value] : overrides) set_config_value(config, key, value);
        config.validate();
    } catch (const std::exception& e) {
        std::cerr << fmt::format("error [stage config]: {}\n", e.what());
        return stage_exit_code(Stage::config);
    }
    if (out_dir.empty()) {
        const char* env = std::getenv("CORTEX_OUT");
        out_dir = env && *env ? env : "cortex-out";
    }

    const auto report = run_experiment(config);
    try {
        export_report(report, out_dir);
    } catch (const PipelineError& e) {
        std::cerr << fmt::format("error [stage {}]: {}\n", stage_name(e.stage()), e.what());
        return stage_exit_code(e.stage());
    }

    std::size_t stored = 0, recognized = 0, novel = 0;
    for (const auto& o : report.outcomes) {
        switch (o.kind) {
            case OutcomeKind::stored: ++stored; break;
            case OutcomeKind::recognized: ++recognized; break;
            case OutcomeKind::novel: ++novel; break;
        }
    }
    std::cout << fmt::format("{} stimuli: {} stored, {} recognized, {} novel-stored\n", report.outcomes.size(),
                             stored, recognized, novel);
    std::cout << fmt::format("features {}, objects {}, output {}\n",
                             report.outcomes.empty() ? 0 : report.outcomes.back().features_after,
                             report.outcomes.empty() ? 0 : report.outcomes.back().objects_after, out_dir);
    if (report.failure) {
        std::cerr << fmt::format("error [stage {}] at stimulus {}: {}\n", stage_name(report.failure->stage),
                                 report.failure->stimulus, report.failure->message);
        return stage_exit_code(report.failure->stage);
    }
    return 0;
}

void inspect_grid(const std::string& content) {
    std::istringstream in(content);
    std::string line;
    std::size_t rows = 0, cols = 0, nonzero = 0;
    double lo = 0, hi = 0;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_line(line, ',');
        cols = std::max(cols, cells.size());
        ++rows;
        for (const auto& c : cells) {
            const double v = std::stod(c);
            if (v != 0.0) ++nonzero;
            lo = first ? v : std::min(lo, v);
            hi = first ? v : std::max(hi, v);
            first = false;
        }
    }
    std::cout << fmt::format("grid {}x{}, nonzero {}, min {}, max {}\n", rows, cols, nonzero, lo, hi);
}

int inspect_command(const fs::path& path) {
    const auto content = slurp(path);
    const auto ext = path.extension().string();
    if (ext == ".pgm") {
        const auto img = parse_pgm(content);
        std::cout << fmt::format("graymap {}x{} maxval {}\n", img.height, img.width, img.maxval);
        const auto retina = to_retina(img, LoadOptions{Dimensions{img.height, img.width}});
        std::array<std::size_t, 11> hist{};
        for (auto v : retina.levels().data()) ++hist[v];
        for (std::size_t l = 0; l < hist.size(); ++l) {
            if (hist[l]) std::cout << fmt::format("  level {:>2}: {}\n", l, hist[l]);
        }
        return 0;
    }
    if (ext == ".csv") {
        inspect_grid(content);
        return 0;
    }
    if (content.starts_with("novelty_fraction")) {
        const auto repo = FeatureRepository::parse(content);
        std::uint64_t total = 0;
        for (const auto& p : repo.prototypes()) total += p.counter;
        std::cout << fmt::format("feature repository: {} prototypes, total usage {}\n", repo.size(), total);
        for (const auto& p : repo.prototypes()) {
            std::cout << fmt::format("  {:>4}  {}  dist {:>3}  beta {:.6g}  tau {}  born {}  survived {}\n", p.id,
                                     fmt::join(p.vector, ""), p.dist_v4, p.beta_v4, p.counter, p.birth_stimulus,
                                     p.survivals);
        }
        return 0;
    }
    if (content.starts_with("alpha")) {
        const auto repo = ObjectRepository::parse(content);
        std::cout << fmt::format("object repository: {} objects, alpha {}, radius {}\n", repo.size(),
                                 repo.params().alpha, repo.params().radius);
        for (const auto& o : repo.objects()) {
            std::cout << fmt::format("  object {}  {}x{}  dist_it {}  beta_it {:.6g}\n", o.id, o.map.rows(),
                                     o.map.cols(), o.dist_it, o.beta_it);
        }
        return 0;
    }
    if (path.filename() == "iom.txt") {
        const auto iom = parse_iom(content);
        std::array<std::size_t, 5> hist{};
        for (auto v : iom.data()) ++hist[v];
        std::cout << fmt::format("orientation map {}x{}: blank {}, 0deg {}, 45deg {}, 90deg {}, 135deg {}\n",
                                 iom.rows(), iom.cols(), hist[0], hist[1], hist[2], hist[3], hist[4]);
        return 0;
    }
    std::cout << content;
    return 0;
}

int stats_command(const fs::path& dir) {
    const auto outcomes = read_table(dir / "outcomes.csv");
    const auto survival = read_table(dir / "survival.csv");
    const auto waves = read_table(dir / "waves.csv");

    std::map<int, std::size_t> disposed_by_epoch;
    std::map<std::string, std::size_t> kinds;
    std::size_t recognized_steps = 0, recognized = 0, early = 0;
    for (const auto& o : outcomes) {
        ++kinds[o.at("outcome")];
        disposed_by_epoch[std::stoi(o.at("epoch"))] += std::stoul(o.at("disposed"));
        if (o.at("outcome") == "recognized") {
            ++recognized;
            recognized_steps += std::stoul(o.at("steps"));
        }
        if (o.at("terminated_early") == "1") ++early;
    }
    std::cout << fmt::format("stimuli {}\n", outcomes.size());
    for (const auto& [k, n] : kinds) std::cout << fmt::format("  {:<11} {}\n", k, n);

    std::cout << "acceleration\n";
    std::cout << fmt::format("  early terminations {}\n", early);
    if (recognized) {
        std::cout << fmt::format("  mean steps to recognition {:.3f}\n",
                                 static_cast<double>(recognized_steps) / static_cast<double>(recognized));
    }
    std::map<int, std::size_t> steps_per_stimulus;
    for (const auto& w : waves) {
        auto& s = steps_per_stimulus[std::stoi(w.at("stimulus"))];
        s = std::max<std::size_t>(s, std::stoul(w.at("step")));
    }
    std::size_t total_steps = 0;
    for (const auto& [_, s] : steps_per_stimulus) total_steps += s;
    if (!steps_per_stimulus.empty()) {
        std::cout << fmt::format("  mean executed steps {:.3f}\n", static_cast<double>(total_steps) /
                                                                      static_cast<double>(steps_per_stimulus.size()));
    }

    std::cout << "survival\n";
    for (const auto& [epoch, n] : disposed_by_epoch) std::cout << fmt::format("  epoch {} disposed {}\n", epoch, n);
    if (!survival.empty()) {
        const auto& last = survival.back();
        std::cout << fmt::format("  first-stimulus cohort {} -> {}\n", survival.front().at("cohort_before"),
                                 last.at("cohort"));
        std::cout << fmt::format("  last survival rate {:.3f}\n", std::stod(last.at("rate")));
        std::cout << fmt::format("  dictionary after last stimulus {}\n", last.at("survived"));
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cortex-like visual recognition experiments"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run an experiment and export its report");
    std::string config_file, out_dir;
    run->add_option("-c,--config", config_file, "key = value configuration file")->check(CLI::ExistingFile);
    run->add_option("-o,--out", out_dir, "output directory (default $CORTEX_OUT or ./cortex-out)");
    std::map<std::string, std::string> overrides;
    const auto keys = config_keys();
    std::vector<std::string> values(keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i) {
        run->add_option("--" + keys[i], values[i], "override " + keys[i]);
    }

    auto* inspect = app.add_subcommand("inspect", "summarize a repository, map or graymap file");
    std::string inspect_path;
    inspect->add_option("path", inspect_path)->required()->check(CLI::ExistingFile);

    auto* stats = app.add_subcommand("stats", "survival and acceleration summaries of a run directory");
    std::string stats_dir;
    stats->add_option("dir", stats_dir)->required()->check(CLI::ExistingDirectory);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsageError;
    }

    try {
        if (*run) {
            for (std::size_t i = 0; i < keys.size(); ++i) {
                if (run->count("--" + keys[i])) overrides[keys[i]] = values[i];
            }
            return run_command(config_file, overrides, out_dir);
        }
        if (*inspect) return inspect_command(inspect_path);
        return stats_command(stats_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsageError;
    }
}
