#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "dentist/types.hpp"

namespace dentist {

class TransportError : public Error {
public:
    using Error::Error;
};

class ScriptMiss : public Error {
public:
    using Error::Error;
};

class EmptyCompletion : public Error {
public:
    using Error::Error;
};

class ImageUnavailable : public Error {
public:
    using Error::Error;
};

class StoreIOError : public Error {
public:
    using Error::Error;
};

// Text-only chat completion (the judge role).
class ChatClient {
public:
    virtual ~ChatClient() = default;
    // Stable identity covering model name and decode parameters; part of the
    // cache fingerprint.
    virtual std::string identity() const = 0;
    virtual std::string complete(const std::string& prompt) = 0;
};

// Image + question answering (the LVLM under correction).
class VqaClient {
public:
    virtual ~VqaClient() = default;
    virtual std::string identity() const = 0;
    virtual std::string answer(const std::string& image_ref, const std::string& question) = 0;
};

// Checked entry points used by the pipeline. They enforce the non-empty
// preconditions and otherwise defer to the backend.
std::string chat_complete(ChatClient& backend, const std::string& prompt);
std::string vqa_answer(VqaClient& backend, const std::string& image_ref,
                       const std::string& question);

// Hex SHA-256 of arbitrary bytes; used for cache fingerprints and template
// hashes.
std::string sha256_hex(const std::string& bytes);

// ---------------------------------------------------------------------------
// Scripted backend: deterministic canned responses for offline runs and tests.
// ---------------------------------------------------------------------------

// Requests are matched against script keys after trimming outer whitespace:
// exact match first, then the longest key contained in the request (ties break
// lexicographically). A key may carry a response sequence; each hit consumes
// the next entry and the last entry repeats.
class ScriptedBackend : public ChatClient, public VqaClient {
public:
    explicit ScriptedBackend(bool strict = true, std::string identity = "scripted");

    void script_chat(std::string key, std::string response);
    void script_chat_sequence(std::string key, std::vector<std::string> responses);
    // image_ref "*" matches any image.
    void script_vqa(std::string image_ref, std::string question_key, std::string response);
    void script_vqa_sequence(std::string image_ref, std::string question_key,
                             std::vector<std::string> responses);

    std::string identity() const override { return identity_; }
    std::string complete(const std::string& prompt) override;
    std::string answer(const std::string& image_ref, const std::string& question) override;

    // In non-strict mode a miss returns this instead of throwing ScriptMiss.
    void set_default_response(std::string response) { default_response_ = std::move(response); }

    struct Call {
        enum class Kind { Chat, Vqa };
        Kind kind;
        std::string image_ref;  // empty for chat
        std::string request;
    };
    std::vector<Call> calls() const;
    int chat_call_count() const;
    int vqa_call_count() const;
    void clear_calls();

private:
    struct Entry {
        std::string image_ref;  // "*" or exact; unused for chat
        std::string key;
        std::vector<std::string> responses;
        std::size_t hits = 0;
    };

    std::string serve(std::vector<Entry>& entries, const std::string& image_ref,
                      const std::string& request, const char* kind);

    bool strict_;
    std::string identity_;
    std::string default_response_ = "unscripted";
    std::vector<Entry> chat_entries_;
    std::vector<Entry> vqa_entries_;
    std::vector<Call> calls_;
    mutable std::mutex mu_;
};

// ---------------------------------------------------------------------------
// Response cache: append-safe directory of fingerprint-named files.
// ---------------------------------------------------------------------------

class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);

    std::optional<std::string> lookup(const std::string& fingerprint) const;
    // Stores the response bytes verbatim. Writes are serialized internally.
    void store(const std::string& fingerprint, const std::string& response);

    // SHA-256 over (backend identity, request key); hex-encoded.
    static std::string fingerprint(const std::string& backend_identity,
                                   const std::string& request_key);

    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    mutable std::mutex mu_;
};

// Cache wrappers are observationally equivalent to the inner backend on first
// calls and replay stored bytes afterwards. Errors are never cached.
std::shared_ptr<ChatClient> wrap_with_cache(std::shared_ptr<ChatClient> inner,
                                            std::shared_ptr<ResponseCache> store);
std::shared_ptr<VqaClient> wrap_with_cache(std::shared_ptr<VqaClient> inner,
                                           std::shared_ptr<ResponseCache> store);

// ---------------------------------------------------------------------------
// Hosted chat-completion backends.
// ---------------------------------------------------------------------------

struct EndpointConfig {
    std::string base_url;  // scheme://host[:port]
    std::string path = "/v1/chat/completions";
    std::string model;
    double temperature = 0.0;  // pipeline calls default to greedy decoding
    int max_tokens = 1024;
    // Transport attempts are bounded by retry_limit + 1, with exponential
    // backoff starting at initial_backoff_ms.
    int retry_limit = 2;
    int initial_backoff_ms = 250;
    std::string api_key_env = "DENTIST_API_KEY";
    int timeout_s = 120;
};

// POSTs {model, temperature, max_tokens, messages:[{role,content}]} and reads
// back the first choice's message content.
class HttpChatBackend : public ChatClient {
public:
    explicit HttpChatBackend(EndpointConfig config);
    std::string identity() const override;
    std::string complete(const std::string& prompt) override;

private:
    EndpointConfig config_;
};

// Same wire protocol with the image attached as a content part. Local file
// references are checked for existence and inlined as data URLs; http(s)
// references pass through.
class HttpVqaBackend : public VqaClient {
public:
    explicit HttpVqaBackend(EndpointConfig config);
    std::string identity() const override;
    std::string answer(const std::string& image_ref, const std::string& question) override;

private:
    EndpointConfig config_;
};

}  // namespace dentist
