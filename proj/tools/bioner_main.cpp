// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

// bioner <command> --out DIR [--config FILE] [--seed N] [--threads N] [key=value ...]

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bioner/cli/commands.hpp"
#include "bioner/cli/config.hpp"

namespace {

struct CommandArgs {
  std::string out;
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> threads;
  std::vector<std::string> overrides;
  bool list_keys = false;
};

const char* summary(const std::string& command) {
  if (command == "prep-corpus") return "Clean raw text into the one-sentence-per-line corpus format";
  if (command == "build-vocab") return "Train a byte-level BPE vocabulary on a corpus";
  if (command == "pretrain") return "Masked-LM and sentence-order pretraining";
  if (command == "finetune") return "Fine-tune a tagger on CoNLL data and score the best dev model on test";
  if (command == "evaluate") return "Entity-level precision, recall and F1 of predictions against gold";
  if (command == "predict") return "Tag a CoNLL file with a fine-tuned checkpoint";
  return "Sentence, token and annotation counts of a CoNLL file or corpus";
}

// Effective values after the config file and overrides, with help text.
void print_keys(const std::string& command, const bioner::cli::RunConfig& config) {
  for (const auto& k : bioner::cli::schema_for(command)) {
    std::cout << k.name << "=" << config.raw(k.name) << "\t# " << k.help << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pretraining and biomedical NER fine-tuning for a parameter-shared transformer encoder", "bioner"};
  app.require_subcommand(1);
  std::vector<CommandArgs> args(bioner::cli::kCommands.size());
  for (std::size_t i = 0; i < bioner::cli::kCommands.size(); ++i) {
    const std::string& name = bioner::cli::kCommands[i];
    CLI::App* sub = app.add_subcommand(name, summary(name));
    CommandArgs& a = args[i];
    sub->add_option("--out", a.out, "output directory (created if missing)");
    sub->add_option("--config", a.config_file, "key=value config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", a.seed, "same as seed=N");
    sub->add_option("--threads", a.threads, "same as threads=N");
    sub->add_flag("--list-keys", a.list_keys, "print accepted keys with their effective values and exit");
    sub->add_option("overrides", a.overrides, "key=value settings applied after the config file");
  }
  CLI11_PARSE(app, argc, argv);

  const CLI::App* chosen = app.get_subcommands().front();
  const std::string command = chosen->get_name();
  std::size_t index = 0;
  while (bioner::cli::kCommands[index] != command) ++index;
  CommandArgs& a = args[index];
  try {
    if (a.seed) a.overrides.push_back("seed=" + std::to_string(*a.seed));
    if (a.threads) a.overrides.push_back("threads=" + std::to_string(*a.threads));
    std::optional<std::filesystem::path> file;
    if (!a.config_file.empty()) file = a.config_file;
    const auto config = bioner::cli::parse_config(command, file, a.overrides);
    if (a.list_keys) {
      print_keys(command, config);
      return 0;
    }
    if (a.out.empty()) throw bioner::cli::ConfigError("--out is required");
    bioner::cli::run(command, config, a.out, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "bioner " << command << ": error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
