#include "lbt/game/content_pack.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "lbt/core/error.hpp"

namespace lbt::game {

namespace {

constexpr std::string_view kSchema = "lbt-content-pack/1";

std::string render(const std::string& source, const std::vector<Diagnostic>& diags) {
  std::string out;
  for (const auto& d : diags) {
    if (!out.empty()) out += '\n';
    out += fmt::format("{}:{}: {}", source, d.line, d.message);
  }
  return out;
}

// Reads YAML nodes into a GameSpec, collecting schema problems instead of
// stopping at the first one.
class PackReader {
 public:
  explicit PackReader(std::vector<Diagnostic>& diags) : diags_(diags) {}

  void error(const YAML::Node& at, std::string path, std::string message) {
    diags_.push_back({std::move(path), std::move(message), line_of(at)});
  }

  int line_of(const YAML::Node& n) const {
    return n.IsDefined() ? n.Mark().line + 1 : 0;
  }

  void remember(const std::string& path, const YAML::Node& n) { lines_[path] = line_of(n); }

  int line_for(const std::string& path) const {
    // Walk up "a.b[2].c" until a remembered prefix is found.
    std::string p = path;
    while (!p.empty()) {
      if (auto it = lines_.find(p); it != lines_.end()) return it->second;
      const auto cut = p.find_last_of(".[");
      if (cut == std::string::npos) break;
      p.resize(cut);
    }
    return 1;
  }

  std::optional<std::string> scalar(const YAML::Node& parent, const char* key,
                                    const std::string& path, bool required) {
    const YAML::Node n = parent[key];
    if (!n.IsDefined() || n.IsNull()) {
      if (required) error(parent, path, fmt::format("missing required key '{}'", key));
      return std::nullopt;
    }
    if (!n.IsScalar()) {
      error(n, path + "." + key, fmt::format("'{}' must be a scalar", key));
      return std::nullopt;
    }
    return n.Scalar();
  }

  std::optional<std::size_t> count(const YAML::Node& parent, const char* key,
                                   const std::string& path, bool required) {
    const YAML::Node n = parent[key];
    if (!n.IsDefined()) {
      if (required) error(parent, path, fmt::format("missing required key '{}'", key));
      return std::nullopt;
    }
    try {
      const auto v = n.as<long long>();
      if (v < 0) throw YAML::BadConversion(n.Mark());
      return static_cast<std::size_t>(v);
    } catch (const YAML::BadConversion&) {
      error(n, path + "." + key, fmt::format("'{}' must be a non-negative integer", key));
      return std::nullopt;
    }
  }

  std::vector<std::string> string_list(const YAML::Node& parent, const char* key,
                                       const std::string& path, bool required) {
    std::vector<std::string> out;
    const YAML::Node n = parent[key];
    if (!n.IsDefined()) {
      if (required) error(parent, path, fmt::format("missing required key '{}'", key));
      return out;
    }
    if (!n.IsSequence()) {
      error(n, path + "." + key, fmt::format("'{}' must be a list", key));
      return out;
    }
    for (const auto& item : n) {
      if (!item.IsScalar()) {
        error(item, path + "." + key, fmt::format("'{}' entries must be scalars", key));
        continue;
      }
      out.push_back(item.Scalar());
    }
    return out;
  }

  // Resolves a correct-answer label to its option index; returns options.size()
  // when absent so validation reports it.
  std::size_t correct_index(const YAML::Node& parent, const std::string& path,
                            const std::vector<std::string>& options) {
    const auto label = scalar(parent, "correct", path, true);
    if (!label) return options.size();
    const auto it = std::find(options.begin(), options.end(), *label);
    return static_cast<std::size_t>(it - options.begin());
  }

 private:
  std::vector<Diagnostic>& diags_;
  std::map<std::string, int> lines_;
};

GameSpec read_pack(const YAML::Node& root, PackReader& rd) {
  GameSpec g;
  if (!root.IsMap()) {
    rd.error(root, "", "content pack must be a mapping at the top level");
    return g;
  }
  if (auto schema = rd.scalar(root, "schema", "", true); schema && *schema != kSchema) {
    rd.error(root["schema"], "schema", fmt::format("unsupported schema '{}', expected '{}'", *schema, kSchema));
  }

  const YAML::Node game = root["game"];
  if (!game.IsMap()) {
    rd.error(root, "game", "missing 'game' mapping");
  } else {
    rd.remember("game", game);
    for (const char* k : {"id", "title", "n_actions", "iteration_count"}) {
      if (game[k].IsDefined()) rd.remember(fmt::format("game.{}", k), game[k]);
    }
    g.id = rd.scalar(game, "id", "game", true).value_or("");
    g.title = rd.scalar(game, "title", "game", true).value_or("");
    g.n_actions = rd.count(game, "n_actions", "game", true).value_or(0);
    g.iteration_count = rd.count(game, "iteration_count", "game", false).value_or(15);
    if (game["test_nouns_unseen"].IsDefined()) {
      try {
        g.test_nouns_unseen = game["test_nouns_unseen"].as<bool>();
      } catch (const YAML::BadConversion&) {
        rd.error(game["test_nouns_unseen"], "game.test_nouns_unseen", "'test_nouns_unseen' must be a boolean");
      }
    }
  }

  if (const YAML::Node meta = root["metadata"]; meta.IsDefined()) {
    if (!meta.IsMap()) {
      rd.error(meta, "metadata", "'metadata' must be a mapping");
    } else {
      for (const auto& kv : meta) g.metadata[kv.first.Scalar()] = kv.second.Scalar();
    }
  }

  g.gestures = rd.string_list(root, "gestures", "", false);

  if (const YAML::Node phrases = root["phrases"]; phrases.IsDefined()) {
    if (!phrases.IsMap()) {
      rd.error(phrases, "phrases", "'phrases' must be a mapping");
    } else {
      for (const auto& kv : phrases) g.phrases[kv.first.Scalar()] = kv.second.Scalar();
    }
  }

  const YAML::Node questions = root["questions"];
  if (!questions.IsSequence()) {
    rd.error(root, "questions", "missing 'questions' list");
  } else {
    rd.remember("questions", questions);
    for (std::size_t i = 0; i < questions.size(); ++i) {
      const YAML::Node qn = questions[i];
      const std::string path = fmt::format("questions[{}]", i);
      rd.remember(path, qn);
      if (!qn.IsMap()) {
        rd.error(qn, path, "question must be a mapping");
        continue;
      }
      QuestionSpec q;
      q.id = rd.scalar(qn, "id", path, true).value_or("");
      q.prompt = rd.scalar(qn, "prompt", path, true).value_or("");
      q.options = rd.string_list(qn, "options", path, true);
      q.correct = ActionId{rd.correct_index(qn, path, q.options)};
      q.hint = rd.scalar(qn, "hint", path, false).value_or("");
      q.gesture_cue = rd.scalar(qn, "gesture", path, false);
      q.noun = rd.scalar(qn, "noun", path, false);
      g.questions.push_back(std::move(q));
    }
  }

  const YAML::Node tests = root["tests"];
  if (!tests.IsMap() || !tests["rounds"].IsSequence()) {
    rd.error(root, "tests", "missing 'tests.rounds' list");
  } else {
    const YAML::Node rounds = tests["rounds"];
    rd.remember("tests.rounds", rounds);
    for (std::size_t r = 0; r < rounds.size(); ++r) {
      const YAML::Node rn = rounds[r];
      const std::string rpath = fmt::format("tests.rounds[{}]", r);
      rd.remember(rpath, rn);
      TestRound round;
      round.name = rd.scalar(rn, "name", rpath, true).value_or("");
      const YAML::Node items = rn["items"];
      if (!items.IsSequence()) {
        rd.error(rn, rpath, "test round needs an 'items' list");
      } else {
        for (std::size_t i = 0; i < items.size(); ++i) {
          const YAML::Node in = items[i];
          const std::string ipath = fmt::format("{}.items[{}]", rpath, i);
          rd.remember(ipath, in);
          TestItem item;
          item.prompt = rd.scalar(in, "prompt", ipath, true).value_or("");
          item.options = rd.string_list(in, "options", ipath, true);
          item.correct = rd.correct_index(in, ipath, item.options);
          item.noun = rd.scalar(in, "noun", ipath, false);
          round.items.push_back(std::move(item));
        }
      }
      g.test_rounds.push_back(std::move(round));
    }
  }

  if (const YAML::Node qs = root["questionnaire"]; qs.IsDefined()) {
    if (!qs.IsSequence()) {
      rd.error(qs, "questionnaire", "'questionnaire' must be a list");
    } else {
      for (std::size_t i = 0; i < qs.size(); ++i) {
        const std::string path = fmt::format("questionnaire[{}]", i);
        rd.remember(path, qs[i]);
        QuestionnaireItem item;
        item.id = rd.scalar(qs[i], "id", path, true).value_or("");
        item.subscale = rd.scalar(qs[i], "subscale", path, true).value_or("");
        item.prompt = rd.scalar(qs[i], "prompt", path, true).value_or("");
        g.questionnaire.push_back(std::move(item));
      }
    }
  }
  return g;
}

void emit_options(YAML::Emitter& out, const std::vector<std::string>& options) {
  out << YAML::Key << "options" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (const auto& o : options) out << YAML::DoubleQuoted << o;
  out << YAML::EndSeq;
}

std::string label_or_empty(const std::vector<std::string>& options, std::size_t i) {
  return i < options.size() ? options[i] : std::string{};
}

}  // namespace

ContentPackError::ContentPackError(std::string source, std::vector<Diagnostic> diagnostics)
    : std::runtime_error(render(source, diagnostics)),
      source_(std::move(source)),
      diagnostics_(std::move(diagnostics)) {}

GameSpec parse_content_pack(std::string_view text, std::string_view source) {
  const std::string src(source);
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ContentPackError(src, {{"", e.msg, e.mark.line + 1}});
  }

  std::vector<Diagnostic> diags;
  PackReader reader(diags);
  GameSpec game = read_pack(root, reader);
  for (auto d : validate(game)) {
    d.line = reader.line_for(d.path);
    diags.push_back(std::move(d));
  }
  if (!diags.empty()) throw ContentPackError(src, std::move(diags));
  return game;
}

GameSpec load_content_pack(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ContentPackError(path.string(), {{"", "cannot open content pack", 0}});
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_content_pack(buf.str(), path.string());
}

std::string emit_content_pack(const GameSpec& game) {
  YAML::Emitter out;
  out.SetIndent(2);
  out << YAML::BeginMap;
  out << YAML::Key << "schema" << YAML::Value << std::string(kSchema);

  out << YAML::Key << "game" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "id" << YAML::Value << YAML::DoubleQuoted << game.id;
  out << YAML::Key << "title" << YAML::Value << YAML::DoubleQuoted << game.title;
  out << YAML::Key << "n_actions" << YAML::Value << game.n_actions;
  out << YAML::Key << "iteration_count" << YAML::Value << game.iteration_count;
  out << YAML::Key << "test_nouns_unseen" << YAML::Value << game.test_nouns_unseen;
  out << YAML::EndMap;

  out << YAML::Key << "metadata" << YAML::Value << YAML::BeginMap;
  for (const auto& [k, v] : game.metadata) out << YAML::Key << k << YAML::Value << YAML::DoubleQuoted << v;
  out << YAML::EndMap;

  out << YAML::Key << "gestures" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (const auto& g : game.gestures) out << YAML::DoubleQuoted << g;
  out << YAML::EndSeq;

  out << YAML::Key << "phrases" << YAML::Value << YAML::BeginMap;
  for (const auto& [k, v] : game.phrases) out << YAML::Key << k << YAML::Value << YAML::DoubleQuoted << v;
  out << YAML::EndMap;

  out << YAML::Key << "questions" << YAML::Value << YAML::BeginSeq;
  for (const auto& q : game.questions) {
    out << YAML::BeginMap;
    out << YAML::Key << "id" << YAML::Value << YAML::DoubleQuoted << q.id;
    out << YAML::Key << "prompt" << YAML::Value << YAML::DoubleQuoted << q.prompt;
    if (q.noun) out << YAML::Key << "noun" << YAML::Value << YAML::DoubleQuoted << *q.noun;
    emit_options(out, q.options);
    out << YAML::Key << "correct" << YAML::Value << YAML::DoubleQuoted
        << label_or_empty(q.options, q.correct.value);
    out << YAML::Key << "hint" << YAML::Value << YAML::DoubleQuoted << q.hint;
    if (q.gesture_cue) out << YAML::Key << "gesture" << YAML::Value << YAML::DoubleQuoted << *q.gesture_cue;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "tests" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "rounds" << YAML::Value << YAML::BeginSeq;
  for (const auto& round : game.test_rounds) {
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << YAML::DoubleQuoted << round.name;
    out << YAML::Key << "items" << YAML::Value << YAML::BeginSeq;
    for (const auto& item : round.items) {
      out << YAML::Flow << YAML::BeginMap;
      out << YAML::Key << "prompt" << YAML::Value << YAML::DoubleQuoted << item.prompt;
      if (item.noun) out << YAML::Key << "noun" << YAML::Value << YAML::DoubleQuoted << *item.noun;
      emit_options(out, item.options);
      out << YAML::Key << "correct" << YAML::Value << YAML::DoubleQuoted
          << label_or_empty(item.options, item.correct);
      out << YAML::EndMap;
    }
    out << YAML::EndSeq << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;

  out << YAML::Key << "questionnaire" << YAML::Value << YAML::BeginSeq;
  for (const auto& item : game.questionnaire) {
    out << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "id" << YAML::Value << YAML::DoubleQuoted << item.id;
    out << YAML::Key << "subscale" << YAML::Value << YAML::DoubleQuoted << item.subscale;
    out << YAML::Key << "prompt" << YAML::Value << YAML::DoubleQuoted << item.prompt;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

GameSpec builtin_body_parts() {
  static const GameSpec game = parse_content_pack(builtin_body_parts_pack(), "builtin:body_parts");
  return game;
}

GameSpec builtin_grammar() {
  static const GameSpec game = parse_content_pack(builtin_grammar_pack(), "builtin:grammar");
  return game;
}

GameCatalog GameCatalog::with_builtins() {
  GameCatalog c;
  c.add(builtin_body_parts());
  c.add(builtin_grammar());
  return c;
}

void GameCatalog::add(GameSpec game) {
  if (auto diags = validate(game); !diags.empty()) {
    throw ContentPackError(game.id, std::move(diags));
  }
  auto id = game.id;
  games_[id] = std::make_shared<const GameSpec>(std::move(game));
}

std::shared_ptr<const GameSpec> GameCatalog::find(std::string_view id) const {
  auto it = games_.find(id);
  return it == games_.end() ? nullptr : it->second;
}

std::vector<std::string> GameCatalog::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : games_) out.push_back(id);
  return out;
}

GameSpec resolve_game(std::string_view name) {
  if (name == "body" || name == "body_parts") return builtin_body_parts();
  if (name == "grammar") return builtin_grammar();
  if (std::filesystem::exists(std::filesystem::path(name))) {
    return load_content_pack(std::filesystem::path(name));
  }
  throw DomainError(fmt::format("unknown game '{}' (expected body, grammar or a pack file)", name));
}

}  // namespace lbt::game
