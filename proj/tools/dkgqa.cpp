#include "dkgqa/config.hpp"
#include "dkgqa/errors.hpp"
#include "dkgqa/pipeline.hpp"
#include "dkgqa/stats.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

using namespace dkgqa;

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kRuntime = 2;

struct Common {
    std::string config_path;
    std::vector<std::string> overrides;
    bool verbose = false;
    bool quiet = false;
};

PipelineConfig resolve_config(const Common& common, const std::vector<std::string>& extra) {
    PipelineConfig cfg = common.config_path.empty() ? PipelineConfig{} : load_config(common.config_path);
    apply_environment(cfg, process_environment());
    apply_overrides(cfg, common.overrides);
    apply_overrides(cfg, extra);
    return cfg;
}

void write_file(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << body;
}

std::string describe(const DatasetVariant& v, const std::string& dir) {
    const auto& m = v.manifest;
    std::string out = "variant " + m.variant_id + " written to " + dir + "\n";
    for (const auto& [split, n] : m.counts) out += "  " + split + ": " + std::to_string(n) + " records\n";
    out += "  documents: " + std::to_string(m.docs_input) + " in, " + std::to_string(m.docs_emitted) + " emitted";
    for (const auto& [stage, n] : m.stage_drops) out += ", " + std::to_string(n) + " " + stage;
    out += "\n  candidates: " + std::to_string(m.candidates_generated) + " generated";
    for (const auto& [stage, n] : m.candidate_drops) out += ", " + std::to_string(n) + " " + stage;
    return out + "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dynamic KGQA: grounded QA datasets from knowledge-graph subgraphs"};
    app.require_subcommand(1);
    app.fallthrough();
    Common common;
    app.add_option("-c,--config", common.config_path, "INI configuration file")->check(CLI::ExistingFile);
    app.add_option("--set", common.overrides, "Override a configuration key (section.key=value)");
    app.add_flag("-v,--verbose", common.verbose, "Debug logging");
    app.add_flag("-q,--quiet", common.quiet, "Warnings and errors only");

    // import-corpus
    auto* import = app.add_subcommand("import-corpus", "Convert a text collection to the corpus JSONL format");
    std::string import_in, import_out, import_format = "jsonl", import_split;
    CorpusImportOptions iopts;
    import->add_option("input", import_in, "Input file")->required()->check(CLI::ExistingFile);
    import->add_option("output", import_out, "Output corpus JSONL")->required();
    import->add_option("--format", import_format, "jsonl, lines or wiki40b")
        ->check(CLI::IsMember({"jsonl", "lines", "wiki40b"}));
    import->add_option("--split", import_split, "Split for every document (train, validation, test)");
    import->add_option("--id-field", iopts.id_field, "Document id field (jsonl)");
    import->add_option("--text-field", iopts.text_field, "Text field (jsonl)");
    import->add_option("--split-field", iopts.split_field, "Split field (jsonl)");
    import->add_option("--id-prefix", iopts.id_prefix, "Id prefix (lines)");

    // generate / variant
    std::vector<std::string> run_overrides;
    std::optional<std::uint64_t> seed;
    std::optional<double> temperature;
    std::optional<std::size_t> workers;
    std::string output_dir, variant_id;
    const auto add_run_options = [&](CLI::App* sub) {
        sub->add_option("--seed", seed, "Triple reordering seed R");
        sub->add_option("--temperature", temperature, "Generation temperature T")->check(CLI::Range(0.0, 2.0));
        sub->add_option("--workers", workers, "Document worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--output", output_dir, "Output directory");
        sub->add_option("--variant-id", variant_id, "Variant id (default derived from seed and temperature)");
    };
    auto* generate = app.add_subcommand("generate", "Run the whole pipeline and write a dataset variant");
    add_run_options(generate);
    auto* variant = app.add_subcommand("variant", "Regenerate QA from cached subgraphs with a new seed and temperature");
    add_run_options(variant);

    // consistency / verify / stats
    std::vector<std::string> variant_ids;
    std::string data_dir;
    auto* consistency = app.add_subcommand("consistency", "Pairwise identical/paraphrased/unique counts and topic chi-square");
    consistency->add_option("variants", variant_ids, "Variant ids (two or more)")->required();
    consistency->add_option("--dir", data_dir, "Directory holding the variants (default: output.dir)");
    std::string report_prefix;
    consistency->add_option("--report", report_prefix, "Write <prefix>.json and <prefix>.txt");

    std::string verify_id;
    bool no_cache = false;
    auto* verify = app.add_subcommand("verify", "Re-check every record's supporting path against its subgraph");
    verify->add_option("variant", verify_id, "Variant id")->required();
    verify->add_option("--dir", data_dir, "Directory holding the variant (default: output.dir)");
    verify->add_flag("--no-cache", no_cache, "Only check records against their own subgraph field");

    auto* stats_cmd = app.add_subcommand("stats", "Summary statistics of variants");
    stats_cmd->add_option("variants", variant_ids, "Variant ids")->required();
    stats_cmd->add_option("--dir", data_dir, "Directory holding the variants (default: output.dir)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    spdlog::set_level(common.verbose ? spdlog::level::debug
                                     : common.quiet ? spdlog::level::warn : spdlog::level::info);
    spdlog::set_pattern("%^%l%$: %v");

    try {
        if (import->parsed()) {
            iopts.format = import_format == "lines"     ? CorpusFormat::lines
                           : import_format == "wiki40b" ? CorpusFormat::wiki40b
                                                        : CorpusFormat::jsonl;
            if (!import_split.empty()) {
                iopts.split = parse_split(import_split);
                if (!iopts.split) throw ConfigError("unknown split '" + import_split + "'");
            }
            const auto docs = import_corpus(import_in, iopts);
            write_corpus(import_out, docs);
            std::cout << docs.size() << " documents written to " << import_out << "\n";
            return kOk;
        }

        std::vector<std::string> extra;
        if (seed) extra.push_back("generation.reorder_seed=" + std::to_string(*seed));
        if (temperature) extra.push_back("generation.temperature=" + std::to_string(*temperature));
        if (workers) extra.push_back("run.workers=" + std::to_string(*workers));
        if (!output_dir.empty()) extra.push_back("output.dir=" + output_dir);
        if (!variant_id.empty()) extra.push_back("output.variant_id=" + variant_id);
        auto cfg = resolve_config(common, extra);
        const auto dir = data_dir.empty() ? cfg.output_dir : data_dir;

        if (generate->parsed()) {
            const auto v = cmd_generate(cfg);
            std::cout << describe(v, cfg.output_dir);
            return kOk;
        }
        if (variant->parsed()) {
            if (!seed) throw ConfigError("variant needs --seed");
            const auto v = cmd_variant(cfg);
            std::cout << describe(v, cfg.output_dir);
            return kOk;
        }
        if (consistency->parsed()) {
            if (variant_ids.size() < 2) throw ConfigError("consistency needs at least two variant ids");
            std::vector<DatasetVariant> variants;
            for (const auto& id : variant_ids) variants.push_back(read_variant(dir, id));
            const auto labeler = make_labeler(cfg);
            const auto rows = compare_variants(variants, *labeler, stats::ClassifyOptions{cfg.jaccard_threshold});
            const auto table = stats::render_table(rows);
            std::cout << table;
            auto report = nlohmann::ordered_json::array();
            for (const auto& r : rows) report.push_back(stats::to_json(r));
            const auto prefix = report_prefix.empty() ? (std::filesystem::path(dir) / "consistency").string() : report_prefix;
            write_file(prefix + ".json", report.dump(2) + "\n");
            write_file(prefix + ".txt", table);
            return kOk;
        }
        if (verify->parsed()) {
            const auto v = read_variant(dir, verify_id);
            std::optional<SubgraphCache> cache;
            if (!no_cache) {
                // A variant moved with --dir keeps its cache beside it unless one is configured.
                const auto cache_dir =
                    cfg.cache_dir.empty() && !data_dir.empty() ? data_dir + "/cache" : cfg.effective_cache_dir();
                cache = read_cache(cache_dir, v.manifest.kg_hash);
            }
            const auto report = verify_variant(v, cache ? &*cache : nullptr);
            for (const auto& f : report.failures) std::cout << "FAIL " << f << "\n";
            std::cout << report.checked << " records checked, " << report.failures.size() << " failed\n";
            return report.ok() ? kOk : kRuntime;
        }
        if (stats_cmd->parsed()) {
            const auto labeler = make_labeler(cfg);
            auto out = nlohmann::ordered_json::array();
            for (const auto& id : variant_ids) out.push_back(variant_stats(read_variant(dir, id), *labeler));
            std::cout << out.dump(2) << "\n";
            return kOk;
        }
    } catch (const ConfigError& e) {
        spdlog::error("{}", e.what());
        return kUsage;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kRuntime;
    }
    return kUsage;
}
