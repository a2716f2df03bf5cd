// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgalign contributors
#include "kgalign/llm.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace kgalign {
namespace {

const char kMask[] = "<mask>";

std::string lower_ascii(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

// Replaces the single <mask> slot in a template; the slot must exist and be
// unique so the substitution is exact.
std::string substitute_mask(const std::string& tmpl, const std::string& value) {
    const std::size_t pos = tmpl.find(kMask);
    if (pos == std::string::npos || tmpl.find(kMask, pos + 1) != std::string::npos) {
        throw std::runtime_error("prompt template must contain exactly one mask slot");
    }
    std::string out = tmpl;
    out.replace(pos, sizeof(kMask) - 1, value);
    return out;
}

std::string strip_wrapping(std::string s) {
    s = trim(s);
    // list markers
    while (!s.empty() && (s.front() == '-' || s.front() == '*' || s.front() == '>')) {
        s = trim(s.substr(1));
    }
    // "1." / "1)" enumerators
    std::size_t digits = 0;
    while (digits < s.size() && std::isdigit(static_cast<unsigned char>(s[digits]))) ++digits;
    if (digits > 0 && digits < s.size() && (s[digits] == '.' || s[digits] == ')')) {
        s = trim(s.substr(digits + 1));
    }
    // label prefixes
    static const char* kPrefixes[] = {"answer:", "output:", "entity:", "name:", "response:"};
    const std::string low = lower_ascii(s);
    for (const char* prefix : kPrefixes) {
        if (low.rfind(prefix, 0) == 0) {
            s = trim(s.substr(std::string(prefix).size()));
            break;
        }
    }
    // surrounding quotes
    auto strip_pair = [&](const std::string& open, const std::string& close) {
        if (s.size() >= open.size() + close.size() && s.rfind(open, 0) == 0 &&
            s.compare(s.size() - close.size(), close.size(), close) == 0) {
            s = trim(s.substr(open.size(), s.size() - open.size() - close.size()));
        }
    };
    strip_pair("\"", "\"");
    strip_pair("'", "'");
    strip_pair("“", "”");
    strip_pair("«", "»");
    return s;
}

char option_label(std::size_t index) { return static_cast<char>('A' + index); }

}  // namespace

std::string Prompt::render() const {
    std::ostringstream os;
    os << instruction << "\n";
    if (!demonstrations.empty()) {
        os << "\nExamples:\n";
        for (const auto& [input, output] : demonstrations) {
            os << "Input: " << input << "\nOutput: " << output << "\n";
        }
    }
    os << "\n" << query;
    return os.str();
}

Prompt build_virtual_entity_prompt(const std::string& entity_name,
                                   const std::vector<std::pair<std::string, std::string>>& demos,
                                   const std::string& target_language) {
    if (trim(entity_name).empty()) throw std::runtime_error("entity name is empty");
    if (demos.empty()) {
        throw std::runtime_error("virtual-entity prompt needs at least one demonstration");
    }
    Prompt p;
    p.kind = Prompt::Kind::VirtualEntity;
    p.subject = entity_name;
    p.instruction =
        "Given the name of an entity from a knowledge graph, reply with the name the same "
        "real-world entity would have in a " +
        target_language +
        " knowledge graph. Reply with that name only, without any explanation.";
    p.demonstrations = demos;
    p.query = substitute_mask("Input: <mask>\nOutput:", entity_name);
    return p;
}

std::optional<std::string> parse_virtual_entity(const std::string& response) {
    std::istringstream is(response);
    std::string line;
    while (std::getline(is, line)) {
        const std::string candidate = strip_wrapping(line);
        if (!candidate.empty()) return candidate;
    }
    return std::nullopt;
}

Prompt build_multichoice_prompt(const std::string& entity_name,
                                const std::vector<std::string>& options) {
    if (trim(entity_name).empty()) throw std::runtime_error("entity name is empty");
    if (options.empty() || options.size() > 4) {
        throw std::runtime_error("multi-choice prompt needs 1 to 4 options");
    }
    std::set<std::string> distinct(options.begin(), options.end());
    if (distinct.size() != options.size()) {
        throw std::runtime_error("multi-choice options must be distinct");
    }
    Prompt p;
    p.kind = Prompt::Kind::MultiChoice;
    p.subject = entity_name;
    p.options = options;
    p.instruction =
        "You are given an entity from one knowledge graph and candidate entities from another. "
        "Choose the option that refers to the same real-world entity. Reply with the letter of "
        "the chosen option. If no option refers to the same entity, reply with \"none\".";
    std::ostringstream q;
    q << substitute_mask("Entity: <mask>\nOptions:\n", entity_name);
    for (std::size_t i = 0; i < options.size(); ++i) {
        q << option_label(i) << ". " << options[i] << "\n";
    }
    q << "Answer:";
    p.query = q.str();
    return p;
}

ChoiceResolution parse_choice(const std::string& response,
                              const std::vector<std::string>& options) {
    if (options.empty()) throw std::runtime_error("no options to resolve against");
    const std::string stripped = strip_wrapping(response);
    const std::string low = lower_ascii(stripped);

    // 1. Leading option label, tolerating wrappers like "(B)" or "Option B".
    {
        std::string head = low;
        std::size_t skip = 0;
        while (skip < head.size() &&
               !std::isalnum(static_cast<unsigned char>(head[skip]))) {
            ++skip;
        }
        head = head.substr(skip);
        for (const char* word : {"the answer is", "option", "choice"}) {
            const std::string w(word);
            if (head.rfind(w, 0) == 0) {
                head = trim(head.substr(w.size()));
                break;
            }
        }
        if (!head.empty()) {
            const char c = head[0];
            const char last =
                static_cast<char>('a' + std::min<std::size_t>(options.size(), 4) - 1);
            if (c >= 'a' && c <= last) {
                const bool delimited = head.size() == 1 || head[1] == '.' || head[1] == ')' ||
                                       head[1] == ':' || head[1] == ',' ||
                                       std::isspace(static_cast<unsigned char>(head[1]));
                if (delimited) return static_cast<std::size_t>(c - 'a');
            }
        }
    }

    // 2. Exact match of an option name.
    for (std::size_t i = 0; i < options.size(); ++i) {
        if (low == lower_ascii(trim(options[i]))) return i;
    }

    // 3. Unique substring containment over the whole response.
    const std::string full = lower_ascii(response);
    std::size_t match_count = 0;
    std::size_t match_index = 0;
    for (std::size_t i = 0; i < options.size(); ++i) {
        const std::string needle = lower_ascii(trim(options[i]));
        if (!needle.empty() && full.find(needle) != std::string::npos) {
            ++match_count;
            match_index = i;
        }
    }
    if (match_count == 1) return match_index;

    // 4. None detection.
    std::size_t pos = low.find("none");
    while (pos != std::string::npos) {
        const bool left_ok =
            pos == 0 || !std::isalnum(static_cast<unsigned char>(low[pos - 1]));
        const std::size_t end = pos + 4;
        const bool right_ok =
            end >= low.size() || !std::isalnum(static_cast<unsigned char>(low[end]));
        if (left_ok && right_ok) return NoneAnswer{};
        pos = low.find("none", pos + 1);
    }
    if (full.find("no equivalent") != std::string::npos) return NoneAnswer{};

    return ParseFailure{};
}

NameOracleBackend::NameOracleBackend(std::map<std::string, std::string> counterpart_by_name)
    : counterpart_by_name_(std::move(counterpart_by_name)) {}

std::string NameOracleBackend::complete(const Prompt& prompt) {
    auto it = counterpart_by_name_.find(prompt.subject);
    if (prompt.kind == Prompt::Kind::VirtualEntity) {
        return it == counterpart_by_name_.end() ? std::string() : it->second;
    }
    if (it != counterpart_by_name_.end()) {
        for (const std::string& option : prompt.options) {
            if (option == it->second) return option;
        }
    }
    return "none";
}

struct ScriptedBackend::State {
    std::vector<std::string> responses;
    std::size_t next = 0;
    std::mutex mutex;
};

ScriptedBackend::ScriptedBackend(std::vector<std::string> responses)
    : state_(std::make_shared<State>()) {
    state_->responses = std::move(responses);
}

std::string ScriptedBackend::complete(const Prompt&) {
    std::lock_guard<std::mutex> lock(state_->mutex);
    if (state_->next >= state_->responses.size()) {
        throw std::runtime_error("scripted backend has no responses left");
    }
    return state_->responses[state_->next++];
}

std::size_t ScriptedBackend::consumed() const {
    std::lock_guard<std::mutex> lock(state_->mutex);
    return state_->next;
}

namespace {

class HttpBackend : public LlmBackend {
public:
    explicit HttpBackend(LiveBackendConfig config) : config_(std::move(config)) {
        const std::size_t scheme_end = config_.endpoint.find("://");
        if (scheme_end == std::string::npos) {
            throw std::runtime_error("endpoint must start with http:// or https://");
        }
        const std::size_t path_start = config_.endpoint.find('/', scheme_end + 3);
        if (path_start == std::string::npos) {
            base_ = config_.endpoint;
            path_ = "/";
        } else {
            base_ = config_.endpoint.substr(0, path_start);
            path_ = config_.endpoint.substr(path_start);
        }
    }

    std::string complete(const Prompt& prompt) override {
        nlohmann::ordered_json body{
            {"model", config_.model},
            {"temperature", config_.temperature},
            {"messages",
             {{{"role", "system"}, {"content", config_.system_preamble}},
              {{"role", "user"}, {"content", prompt.render()}}}},
        };
        const std::string payload = body.dump();

        std::string last_error;
        for (int attempt = 0; attempt <= config_.transport_retries; ++attempt) {
            httplib::Client client(base_);
            client.set_connection_timeout(config_.timeout_seconds, 0);
            client.set_read_timeout(config_.timeout_seconds, 0);
            client.set_write_timeout(config_.timeout_seconds, 0);
            httplib::Headers headers;
            if (const char* key = std::getenv(config_.api_key_env.c_str())) {
                headers.emplace("Authorization", std::string("Bearer ") + key);
            }
            auto res = client.Post(path_, headers, payload, "application/json");
            if (!res) {
                last_error = "transport error: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status == 429 || res->status >= 500) {
                last_error = "server returned status " + std::to_string(res->status);
                continue;
            }
            if (res->status != 200) {
                throw std::runtime_error("backend request failed with status " +
                                         std::to_string(res->status) + ": " +
                                         res->body.substr(0, 200));
            }
            return extract_content(res->body);
        }
        throw std::runtime_error("backend unreachable after " +
                                 std::to_string(config_.transport_retries + 1) +
                                 " attempts: " + last_error);
    }

private:
    static std::string extract_content(const std::string& body) {
        const auto json = nlohmann::json::parse(body, nullptr, false);
        if (json.is_discarded()) {
            throw std::runtime_error("backend response is not valid JSON");
        }
        if (json.contains("choices") && json["choices"].is_array() &&
            !json["choices"].empty()) {
            const auto& first = json["choices"][0];
            if (first.contains("message") && first["message"].contains("content")) {
                return first["message"]["content"].get<std::string>();
            }
            if (first.contains("text")) {
                return first["text"].get<std::string>();
            }
        }
        // ERNIE-style flat result field
        if (json.contains("result") && json["result"].is_string()) {
            return json["result"].get<std::string>();
        }
        throw std::runtime_error("backend response has no generated text");
    }

    LiveBackendConfig config_;
    std::string base_;
    std::string path_;
};

}  // namespace

std::unique_ptr<LlmBackend> make_live_backend(const LiveBackendConfig& config) {
    return std::make_unique<HttpBackend>(config);
}

}  // namespace kgalign
