#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lbt/game/game_spec.hpp"

namespace lbt::game {

/// Raised when a content pack fails to parse or violates a game invariant.
/// what() lists every problem as "source:line: message", one per line.
class ContentPackError : public std::runtime_error {
 public:
  ContentPackError(std::string source, std::vector<Diagnostic> diagnostics);

  const std::string& source() const { return source_; }
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::string source_;
  std::vector<Diagnostic> diagnostics_;
};

// Parses and validates a content pack held in memory. `source` names the
// text in diagnostics.
GameSpec parse_content_pack(std::string_view text, std::string_view source = "<pack>");

GameSpec load_content_pack(const std::filesystem::path& path);

// Writes a pack that parse_content_pack reads back to an equal GameSpec.
std::string emit_content_pack(const GameSpec& game);

// Built-in games, parsed from the packs compiled into the library.
GameSpec builtin_body_parts();
GameSpec builtin_grammar();

std::string_view builtin_body_parts_pack();
std::string_view builtin_grammar_pack();

/// Immutable set of games addressable by id; shared across sessions.
class GameCatalog {
 public:
  // Catalog holding both built-in games.
  static GameCatalog with_builtins();

  // Adds or replaces a game. Invalid games are rejected.
  void add(GameSpec game);

  std::shared_ptr<const GameSpec> find(std::string_view id) const;
  std::vector<std::string> ids() const;

 private:
  std::map<std::string, std::shared_ptr<const GameSpec>, std::less<>> games_;
};

// Resolves a CLI game argument: "body"/"body_parts", "grammar", a catalog
// id, or a path to a pack file.
GameSpec resolve_game(std::string_view name);

}  // namespace lbt::game
