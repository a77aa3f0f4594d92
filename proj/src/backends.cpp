#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "dentist/backends.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

namespace dentist {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return "";
    }
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

std::string chat_complete(ChatClient& backend, const std::string& prompt) {
    if (prompt.empty()) {
        throw Error("chat_complete: empty prompt");
    }
    return backend.complete(prompt);
}

std::string vqa_answer(VqaClient& backend, const std::string& image_ref,
                       const std::string& question) {
    if (question.empty()) {
        throw Error("vqa_answer: empty question");
    }
    return backend.answer(image_ref, question);
}

// ---------------------------------------------------------------------------
// ScriptedBackend
// ---------------------------------------------------------------------------

ScriptedBackend::ScriptedBackend(bool strict, std::string identity)
    : strict_(strict), identity_(std::move(identity)) {}

void ScriptedBackend::script_chat(std::string key, std::string response) {
    script_chat_sequence(std::move(key), {std::move(response)});
}

void ScriptedBackend::script_chat_sequence(std::string key, std::vector<std::string> responses) {
    std::lock_guard<std::mutex> lock(mu_);
    chat_entries_.push_back(Entry{"", std::move(key), std::move(responses), 0});
}

void ScriptedBackend::script_vqa(std::string image_ref, std::string question_key,
                                 std::string response) {
    script_vqa_sequence(std::move(image_ref), std::move(question_key), {std::move(response)});
}

void ScriptedBackend::script_vqa_sequence(std::string image_ref, std::string question_key,
                                          std::vector<std::string> responses) {
    std::lock_guard<std::mutex> lock(mu_);
    vqa_entries_.push_back(
        Entry{std::move(image_ref), std::move(question_key), std::move(responses), 0});
}

std::string ScriptedBackend::serve(std::vector<Entry>& entries, const std::string& image_ref,
                                   const std::string& request, const char* kind) {
    const std::string key = trim(request);

    Entry* best = nullptr;
    bool best_exact = false;
    for (auto& entry : entries) {
        if (entry.image_ref != "*" && !entry.image_ref.empty() && entry.image_ref != image_ref) {
            continue;
        }
        if (entry.key == key) {
            if (!best_exact) {
                best = &entry;
                best_exact = true;
            }
            continue;
        }
        if (best_exact) {
            continue;
        }
        if (key.find(entry.key) != std::string::npos) {
            if (best == nullptr || entry.key.size() > best->key.size() ||
                (entry.key.size() == best->key.size() && entry.key < best->key)) {
                best = &entry;
            }
        }
    }

    if (best == nullptr) {
        if (strict_) {
            throw ScriptMiss(std::string(kind) + " script miss for request: " + key);
        }
        return default_response_;
    }
    std::size_t idx = std::min(best->hits, best->responses.size() - 1);
    ++best->hits;
    return best->responses[idx];
}

std::string ScriptedBackend::complete(const std::string& prompt) {
    std::lock_guard<std::mutex> lock(mu_);
    calls_.push_back(Call{Call::Kind::Chat, "", prompt});
    return serve(chat_entries_, "", prompt, "chat");
}

std::string ScriptedBackend::answer(const std::string& image_ref, const std::string& question) {
    std::lock_guard<std::mutex> lock(mu_);
    calls_.push_back(Call{Call::Kind::Vqa, image_ref, question});
    return serve(vqa_entries_, image_ref, question, "vqa");
}

std::vector<ScriptedBackend::Call> ScriptedBackend::calls() const {
    std::lock_guard<std::mutex> lock(mu_);
    return calls_;
}

int ScriptedBackend::chat_call_count() const {
    std::lock_guard<std::mutex> lock(mu_);
    return static_cast<int>(std::count_if(calls_.begin(), calls_.end(), [](const Call& c) {
        return c.kind == Call::Kind::Chat;
    }));
}

int ScriptedBackend::vqa_call_count() const {
    std::lock_guard<std::mutex> lock(mu_);
    return static_cast<int>(std::count_if(calls_.begin(), calls_.end(), [](const Call& c) {
        return c.kind == Call::Kind::Vqa;
    }));
}

void ScriptedBackend::clear_calls() {
    std::lock_guard<std::mutex> lock(mu_);
    calls_.clear();
}

// ---------------------------------------------------------------------------
// ResponseCache
// ---------------------------------------------------------------------------

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) {
        throw StoreIOError("cannot create cache directory " + dir_.string() + ": " + ec.message());
    }
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int digest_len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &digest_len, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256 digest failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(digest_len * 2);
    for (unsigned int i = 0; i < digest_len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

std::string ResponseCache::fingerprint(const std::string& backend_identity,
                                       const std::string& request_key) {
    std::string material = backend_identity;
    material.push_back('\x1f');
    material += request_key;
    return sha256_hex(material);
}

std::optional<std::string> ResponseCache::lookup(const std::string& fingerprint) const {
    std::lock_guard<std::mutex> lock(mu_);
    std::filesystem::path file = dir_ / fingerprint;
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        return std::nullopt;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    if (!in.good() && !in.eof()) {
        throw StoreIOError("cannot read cache entry " + file.string());
    }
    return buf.str();
}

void ResponseCache::store(const std::string& fingerprint, const std::string& response) {
    std::lock_guard<std::mutex> lock(mu_);
    std::filesystem::path file = dir_ / fingerprint;
    std::filesystem::path tmp = dir_ / (fingerprint + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw StoreIOError("cannot write cache entry " + tmp.string());
        }
        out.write(response.data(), static_cast<std::streamsize>(response.size()));
        if (!out.good()) {
            throw StoreIOError("short write to cache entry " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, file, ec);
    if (ec) {
        throw StoreIOError("cannot finalize cache entry " + file.string() + ": " + ec.message());
    }
}

namespace {

class CachedChat : public ChatClient {
public:
    CachedChat(std::shared_ptr<ChatClient> inner, std::shared_ptr<ResponseCache> store)
        : inner_(std::move(inner)), store_(std::move(store)) {}

    std::string identity() const override { return inner_->identity(); }

    std::string complete(const std::string& prompt) override {
        std::string fp = ResponseCache::fingerprint(inner_->identity(), "chat\x1f" + prompt);
        if (auto hit = store_->lookup(fp)) {
            return *hit;
        }
        std::string response = inner_->complete(prompt);
        store_->store(fp, response);
        return response;
    }

private:
    std::shared_ptr<ChatClient> inner_;
    std::shared_ptr<ResponseCache> store_;
};

class CachedVqa : public VqaClient {
public:
    CachedVqa(std::shared_ptr<VqaClient> inner, std::shared_ptr<ResponseCache> store)
        : inner_(std::move(inner)), store_(std::move(store)) {}

    std::string identity() const override { return inner_->identity(); }

    std::string answer(const std::string& image_ref, const std::string& question) override {
        std::string fp = ResponseCache::fingerprint(
            inner_->identity(), "vqa\x1f" + image_ref + "\x1f" + question);
        if (auto hit = store_->lookup(fp)) {
            return *hit;
        }
        std::string response = inner_->answer(image_ref, question);
        store_->store(fp, response);
        return response;
    }

private:
    std::shared_ptr<VqaClient> inner_;
    std::shared_ptr<ResponseCache> store_;
};

}  // namespace

std::shared_ptr<ChatClient> wrap_with_cache(std::shared_ptr<ChatClient> inner,
                                            std::shared_ptr<ResponseCache> store) {
    return std::make_shared<CachedChat>(std::move(inner), std::move(store));
}

std::shared_ptr<VqaClient> wrap_with_cache(std::shared_ptr<VqaClient> inner,
                                           std::shared_ptr<ResponseCache> store) {
    return std::make_shared<CachedVqa>(std::move(inner), std::move(store));
}

// ---------------------------------------------------------------------------
// HTTP backends
// ---------------------------------------------------------------------------

namespace {

std::string base64_encode(const std::string& bytes) {
    static const char* table =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    while (i + 2 < bytes.size()) {
        unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                     (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                     static_cast<unsigned char>(bytes[i + 2]);
        out.push_back(table[(v >> 18) & 63]);
        out.push_back(table[(v >> 12) & 63]);
        out.push_back(table[(v >> 6) & 63]);
        out.push_back(table[v & 63]);
        i += 3;
    }
    if (i + 1 == bytes.size()) {
        unsigned v = static_cast<unsigned char>(bytes[i]) << 16;
        out.push_back(table[(v >> 18) & 63]);
        out.push_back(table[(v >> 12) & 63]);
        out += "==";
    } else if (i + 2 == bytes.size()) {
        unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                     (static_cast<unsigned char>(bytes[i + 1]) << 8);
        out.push_back(table[(v >> 18) & 63]);
        out.push_back(table[(v >> 12) & 63]);
        out.push_back(table[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

std::string mime_for_extension(const std::filesystem::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
    if (ext == ".png") return "image/png";
    if (ext == ".gif") return "image/gif";
    if (ext == ".webp") return "image/webp";
    if (ext == ".bmp") return "image/bmp";
    return "application/octet-stream";
}

bool retryable_status(int status) {
    return status == 408 || status == 429 || status >= 500;
}

std::string api_key_from_env(const std::string& env_name) {
    const char* key = std::getenv(env_name.c_str());
    return key != nullptr ? key : "";
}

std::string post_chat_request(const EndpointConfig& config, const json& body) {
    const std::string payload = body.dump();
    std::string last_error;

    for (int attempt = 0; attempt <= config.retry_limit; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(
                std::chrono::milliseconds(config.initial_backoff_ms << (attempt - 1)));
        }
        httplib::Client client(config.base_url);
        client.set_connection_timeout(config.timeout_s, 0);
        client.set_read_timeout(config.timeout_s, 0);
        client.set_write_timeout(config.timeout_s, 0);
        std::string api_key = api_key_from_env(config.api_key_env);
        httplib::Headers headers;
        if (!api_key.empty()) {
            headers.emplace("Authorization", "Bearer " + api_key);
        }

        auto result = client.Post(config.path, headers, payload, "application/json");
        if (!result) {
            last_error = "transport failure: " + httplib::to_string(result.error());
            continue;
        }
        if (result->status == 200) {
            return result->body;
        }
        last_error = "HTTP status " + std::to_string(result->status) + ": " + result->body;
        if (!retryable_status(result->status)) {
            throw TransportError(last_error);
        }
    }
    throw TransportError(last_error + " (after " + std::to_string(config.retry_limit + 1) +
                         " attempts)");
}

std::string extract_first_choice(const std::string& raw_body) {
    json body;
    try {
        body = json::parse(raw_body);
    } catch (const json::exception& e) {
        throw TransportError(std::string("unparseable response body: ") + e.what());
    }
    if (!body.contains("choices") || !body["choices"].is_array() || body["choices"].empty()) {
        throw EmptyCompletion("response carries no choices");
    }
    const json& message = body["choices"][0].value("message", json::object());
    std::string content = message.value("content", "");
    if (content.empty()) {
        throw EmptyCompletion("response carries no message content");
    }
    return content;
}

std::string decode_suffix(const EndpointConfig& config) {
    std::ostringstream out;
    out << ":t=" << config.temperature << ":m=" << config.max_tokens;
    return out.str();
}

}  // namespace

HttpChatBackend::HttpChatBackend(EndpointConfig config) : config_(std::move(config)) {}

std::string HttpChatBackend::identity() const {
    return "chat:" + config_.model + "@" + config_.base_url + decode_suffix(config_);
}

std::string HttpChatBackend::complete(const std::string& prompt) {
    json body = {
        {"model", config_.model},
        {"temperature", config_.temperature},
        {"max_tokens", config_.max_tokens},
        {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
    };
    return extract_first_choice(post_chat_request(config_, body));
}

HttpVqaBackend::HttpVqaBackend(EndpointConfig config) : config_(std::move(config)) {}

std::string HttpVqaBackend::identity() const {
    return "vqa:" + config_.model + "@" + config_.base_url + decode_suffix(config_);
}

std::string HttpVqaBackend::answer(const std::string& image_ref, const std::string& question) {
    std::string url;
    if (image_ref.find("://") != std::string::npos) {
        url = image_ref;
    } else {
        std::filesystem::path file(image_ref);
        std::ifstream in(file, std::ios::binary);
        if (!in) {
            throw ImageUnavailable("cannot open image: " + image_ref);
        }
        std::ostringstream bytes;
        bytes << in.rdbuf();
        url = "data:" + mime_for_extension(file) + ";base64," + base64_encode(bytes.str());
    }

    json content = json::array({
        json{{"type", "image_url"}, {"image_url", json{{"url", url}}}},
        json{{"type", "text"}, {"text", question}},
    });
    json body = {
        {"model", config_.model},
        {"temperature", config_.temperature},
        {"max_tokens", config_.max_tokens},
        {"messages", json::array({json{{"role", "user"}, {"content", content}}})},
    };
    return extract_first_choice(post_chat_request(config_, body));
}

}  // namespace dentist
