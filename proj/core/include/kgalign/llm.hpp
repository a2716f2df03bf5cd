// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgalign contributors
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace kgalign {

/// A rendered chat request. `options` carries the structured option names
/// for multi-choice prompts so that deterministic mock backends can answer
/// without re-parsing the rendered text; wire backends only use render().
struct Prompt {
    enum class Kind { VirtualEntity, MultiChoice };

    Kind kind = Kind::VirtualEntity;
    std::string instruction;
    std::vector<std::pair<std::string, std::string>> demonstrations;
    std::string query;
    std::string subject;               // the entity name substituted into the query
    std::vector<std::string> options;  // multi-choice only

    std::string render() const;
};

/// Builds the knowledge prompt asking the model for the target-language
/// name of the same real-world entity. Requires at least one demonstration
/// pair; the entity name appears exactly once in the query.
Prompt build_virtual_entity_prompt(const std::string& entity_name,
                                   const std::vector<std::pair<std::string, std::string>>& demos,
                                   const std::string& target_language);

/// Extracts the generated name: first non-empty line, stripped of list
/// markers, label prefixes and surrounding quotes. Empty result -> nullopt.
std::optional<std::string> parse_virtual_entity(const std::string& response);

/// Builds a multi-choice question over 1-4 distinct option names, labelled
/// A-D in the given order. The instruction allows a "none" answer.
Prompt build_multichoice_prompt(const std::string& entity_name,
                                const std::vector<std::string>& options);

struct NoneAnswer {};
struct ParseFailure {};
using ChoiceResolution = std::variant<std::size_t, NoneAnswer, ParseFailure>;

/// Resolution cascade: leading option label, exact option-name match,
/// unique substring containment, then none-detection keywords.
ChoiceResolution parse_choice(const std::string& response,
                              const std::vector<std::string>& options);

/// Abstract chat-model boundary. Implementations must be safe for
/// concurrent complete() calls.
class LlmBackend {
public:
    virtual ~LlmBackend() = default;
    virtual std::string complete(const Prompt& prompt) = 0;
};

/// Deterministic mock that knows the ground-truth alignment by name.
/// Multi-choice prompts are answered with the option matching the mapped
/// counterpart name (else a none answer); virtual-entity prompts are
/// answered with the mapped counterpart name itself.
class NameOracleBackend : public LlmBackend {
public:
    explicit NameOracleBackend(std::map<std::string, std::string> counterpart_by_name);
    std::string complete(const Prompt& prompt) override;

private:
    std::map<std::string, std::string> counterpart_by_name_;
};

/// Replays canned responses in order; throws when exhausted.
class ScriptedBackend : public LlmBackend {
public:
    explicit ScriptedBackend(std::vector<std::string> responses);
    std::string complete(const Prompt& prompt) override;
    std::size_t consumed() const;

private:
    struct State;
    std::shared_ptr<State> state_;
};

/// Wire configuration for a live chat-completions endpoint. The credential
/// is read from the named environment variable at request time and never
/// written to any artifact.
struct LiveBackendConfig {
    std::string endpoint = "http://localhost:8080/v1/chat/completions";
    std::string model = "default";
    double temperature = 0.0;
    std::string system_preamble =
        "You are a precise assistant for knowledge-graph entity alignment. "
        "Answer concisely and exactly in the requested format.";
    std::string api_key_env = "KGALIGN_API_KEY";
    int timeout_seconds = 60;
    int transport_retries = 2;
};

/// HTTP client posting {model, temperature, messages:[...]} and reading
/// choices[0].message.content. Retries transport failures up to the
/// configured budget, then throws.
std::unique_ptr<LlmBackend> make_live_backend(const LiveBackendConfig& config);

}  // namespace kgalign
