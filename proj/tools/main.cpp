#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "convtok/augment.hpp"
#include "convtok/corpus.hpp"
#include "convtok/error.hpp"
#include "convtok/extract.hpp"
#include "convtok/io.hpp"
#include "convtok/metrics.hpp"
#include "convtok/simulate.hpp"
#include "convtok/tokenizer.hpp"

namespace {

using namespace convtok;

std::vector<std::string> all_task_surfaces() {
  return {token_surface(TokenKind::SC), token_surface(TokenKind::EP),
          token_surface(TokenKind::NeOpen), token_surface(TokenKind::NeClose)};
}

// prepare: corpus JSONL -> packed, token-augmented utterance JSONL.
void add_prepare(CLI::App& app) {
  auto cmd = app.add_subcommand(
      "prepare", "pack conversations and tag the text with task tokens");
  auto corpus_path = std::make_shared<std::string>();
  auto out_path = std::make_shared<std::string>();
  auto tasks = std::make_shared<std::string>("sc,ep,ne");
  auto max_duration = std::make_shared<double>(20.0);
  auto print_stats = std::make_shared<bool>(false);
  cmd->add_option("--corpus", *corpus_path, "conversation corpus JSONL")
      ->required();
  cmd->add_option("--out", *out_path, "output utterance JSONL")->required();
  cmd->add_option("--tasks", *tasks,
                  "comma-separated subset of sc,ep,ne (empty = plain text)");
  cmd->add_option("--max-duration", *max_duration,
                  "utterance packing window in seconds");
  cmd->add_flag("--stats", *print_stats, "print corpus statistics afterwards");
  cmd->callback([=]() {
    PackConfig config;
    config.max_duration = *max_duration;
    config.tasks = task_set_from_string(*tasks);
    std::vector<Utterance> utterances;
    for (const Conversation& conv : load_corpus(*corpus_path)) {
      for (Utterance& utt : prepare_conversation(conv, config)) {
        utterances.push_back(std::move(utt));
      }
    }
    save_utterances(utterances, *out_path);
    if (*print_stats) std::cout << format_stats(corpus_stats(utterances));
  });
}

void add_stats(CLI::App& app) {
  auto cmd = app.add_subcommand("stats", "corpus statistics of utterance JSONL");
  auto input = std::make_shared<std::string>();
  cmd->add_option("--input", *input, "utterance JSONL")->required();
  cmd->callback([=]() {
    std::cout << format_stats(corpus_stats(load_utterances(*input)));
  });
}

void add_train_tokenizer(CLI::App& app) {
  auto cmd = app.add_subcommand(
      "train-tokenizer",
      "train a BPE vocabulary with task tokens as protected pieces");
  auto input = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto vocab_size = std::make_shared<int>(0);
  cmd->add_option("--input", *input, "utterance JSONL")->required();
  cmd->add_option("--out", *out, "output vocabulary file")->required();
  cmd->add_option("--vocab-size", *vocab_size, "maximum number of pieces")
      ->required();
  cmd->callback([=]() {
    const Vocab vocab = train_bpe_utterances(load_utterances(*input),
                                             *vocab_size, all_task_surfaces());
    save_vocab(vocab, *out);
    std::cout << "vocab pieces: " << vocab.size() << "\n";
  });
}

// encode: utterance JSONL + vocab -> id sequences.
void add_encode(CLI::App& app) {
  auto cmd = app.add_subcommand("encode",
                                "encode utterances to piece ids with a "
                                "trained vocabulary");
  auto input = std::make_shared<std::string>();
  auto vocab_path = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  cmd->add_option("--input", *input, "utterance JSONL")->required();
  cmd->add_option("--vocab", *vocab_path, "vocabulary file")->required();
  cmd->add_option("--out", *out, "output JSONL of id sequences")->required();
  cmd->callback([=]() {
    const Vocab vocab = load_vocab(*vocab_path);
    std::string lines;
    for (const Utterance& utt : load_utterances(*input)) {
      nlohmann::json j{{"conversation_id", utt.conversation_id},
                       {"audio_start", utt.audio_start},
                       {"ids", encode(vocab, utt.items)}};
      lines += j.dump();
      lines += '\n';
    }
    write_text_file_atomic(*out, lines);
  });
}

void add_evaluate(CLI::App& app) {
  auto cmd = app.add_subcommand(
      "evaluate", "score hypotheses against reference utterances");
  auto corpus_path = std::make_shared<std::string>();
  auto ref_path = std::make_shared<std::string>();
  auto hyp_path = std::make_shared<std::string>();
  auto tasks = std::make_shared<std::string>("sc,ep,ne");
  auto collar = std::make_shared<double>(0.250);
  auto frame_duration = std::make_shared<double>(0.025);
  auto frame_stride = std::make_shared<double>(0.020);
  auto report_path = std::make_shared<std::string>();
  auto tsv_path = std::make_shared<std::string>();
  auto quiet = std::make_shared<bool>(false);
  cmd->add_option("--corpus", *corpus_path,
                  "conversation corpus JSONL (segment timing)")
      ->required();
  cmd->add_option("--ref", *ref_path, "reference utterance JSONL")->required();
  cmd->add_option("--hyp", *hyp_path, "hypothesis JSONL")->required();
  cmd->add_option("--tasks", *tasks, "tasks to score (subset of sc,ep,ne)");
  cmd->add_option("--collar", *collar,
                  "timestamp matching tolerance in seconds");
  cmd->add_option("--frame-duration", *frame_duration,
                  "acoustic frame length in seconds");
  cmd->add_option("--frame-stride", *frame_stride,
                  "acoustic frame step in seconds");
  cmd->add_option("--report", *report_path, "write corpus scores as JSON");
  cmd->add_option("--tsv", *tsv_path, "write per-utterance scores as TSV");
  cmd->add_flag("--quiet", *quiet, "suppress the summary on stdout");
  cmd->callback([=]() {
    EvalConfig config;
    config.tasks = task_set_from_string(*tasks);
    config.collar = *collar;
    config.frames = {*frame_duration, *frame_stride};
    const EvalReport report =
        evaluate_corpus(load_corpus(*corpus_path), load_utterances(*ref_path),
                        load_hypotheses(*hyp_path), config);
    if (!report_path->empty()) {
      write_text_file_atomic(*report_path, report_json(report));
    }
    if (!tsv_path->empty()) {
      write_text_file_atomic(*tsv_path, report_tsv(report));
    }
    if (!*quiet) std::cout << report_summary(report);
  });
}

// simulate: synthetic corpus + references + corrupted hypotheses + edit log.
void add_simulate(CLI::App& app) {
  auto cmd = app.add_subcommand(
      "simulate",
      "generate a synthetic corpus with corrupted hypotheses and an edit log");
  auto out_dir = std::make_shared<std::string>();
  auto seed = std::make_shared<std::uint64_t>(42);
  auto noise_seed = std::make_shared<std::int64_t>(-1);
  auto conversations = std::make_shared<long>(20);
  auto tasks = std::make_shared<std::string>("sc,ep,ne");
  auto max_duration = std::make_shared<double>(20.0);
  auto sub_rate = std::make_shared<double>(0.0);
  auto del_rate = std::make_shared<double>(0.0);
  auto ins_rate = std::make_shared<double>(0.0);
  auto drop_rate = std::make_shared<double>(0.0);
  auto jitter = std::make_shared<long>(0);
  auto frame_duration = std::make_shared<double>(0.025);
  auto frame_stride = std::make_shared<double>(0.020);
  cmd->add_option("--out-dir", *out_dir, "output directory")->required();
  cmd->add_option("--seed", *seed, "corpus generation seed");
  cmd->add_option("--noise-seed", *noise_seed,
                  "corruption seed (default: seed + 1)");
  cmd->add_option("--conversations", *conversations,
                  "number of conversations");
  cmd->add_option("--tasks", *tasks, "task tokens to tag (subset of sc,ep,ne)");
  cmd->add_option("--max-duration", *max_duration,
                  "utterance packing window in seconds");
  cmd->add_option("--sub-rate", *sub_rate, "word substitution probability");
  cmd->add_option("--del-rate", *del_rate, "word deletion probability");
  cmd->add_option("--ins-rate", *ins_rate, "word insertion probability");
  cmd->add_option("--token-drop-rate", *drop_rate,
                  "task token drop probability");
  cmd->add_option("--jitter", *jitter, "emission frame jitter (+/- frames)");
  cmd->add_option("--frame-duration", *frame_duration,
                  "acoustic frame length in seconds");
  cmd->add_option("--frame-stride", *frame_stride,
                  "acoustic frame step in seconds");
  cmd->callback([=]() {
    SimConfig sim;
    sim.seed = *seed;
    sim.conversations = *conversations;
    NoiseConfig noise;
    noise.seed = *noise_seed < 0 ? *seed + 1
                                 : static_cast<std::uint64_t>(*noise_seed);
    noise.sub_rate = *sub_rate;
    noise.del_rate = *del_rate;
    noise.ins_rate = *ins_rate;
    noise.token_drop_rate = *drop_rate;
    noise.frame_jitter = *jitter;
    const FrameSpec frames{*frame_duration, *frame_stride};
    PackConfig pack;
    pack.max_duration = *max_duration;
    pack.tasks = task_set_from_string(*tasks);

    const std::vector<Conversation> corpus = generate_corpus(sim);
    std::vector<Utterance> references;
    for (const Conversation& conv : corpus) {
      for (Utterance& utt : prepare_conversation(conv, pack)) {
        references.push_back(std::move(utt));
      }
    }
    const std::vector<CorruptResult> corrupted =
        corrupt_corpus(references, corpus, noise, frames);
    std::vector<Hypothesis> hypotheses;
    std::vector<UtteranceEdits> edit_log;
    for (size_t i = 0; i < corrupted.size(); ++i) {
      hypotheses.push_back(corrupted[i].hypothesis);
      edit_log.push_back(
          {utterance_key(corrupted[i].hypothesis.ref), corrupted[i].edits});
    }

    const std::filesystem::path dir(*out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
      throw IoError("cannot create directory " + dir.string() + ": " +
                    ec.message());
    }
    save_corpus(corpus, dir / "corpus.jsonl");
    save_utterances(references, dir / "references.jsonl");
    save_hypotheses(hypotheses, dir / "hypotheses.jsonl");
    save_edit_log(edit_log, dir / "edits.jsonl");
    std::cout << "wrote " << corpus.size() << " conversations, "
              << references.size() << " utterances to " << dir.string()
              << "\n";
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dataset preparation and scoring for token-augmented "
               "multitask conversational ASR"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from a config file");

  add_prepare(app);
  add_stats(app);
  add_train_tokenizer(app);
  add_encode(app);
  add_evaluate(app);
  add_simulate(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // bad usage is a validation failure
  } catch (const convtok::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const convtok::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
