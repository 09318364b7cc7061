#pragma once

#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>
#include <zlib.h>

#include <nlohmann/json.hpp>

#include "zoi/error.hpp"
#include "zoi/geo.hpp"
#include "zoi/ingest.hpp"

// File-backed document store. Layout:
//   <dir>/tweet.jsonl   one canonical JSON line per tweet document
//   <dir>/photo.jsonl   one canonical JSON line per photo document
//   <dir>/LOCK          held (flock) by the single writer
// Each line is {"body":{...},"doc_id":N,"integrity":{"crc32":"........","length":L}}
// where length and crc32 cover the canonical dump of body.
namespace zoi::store {

enum class Collection { photo, tweet };

inline std::string_view to_string(Collection c) { return c == Collection::photo ? "photo" : "tweet"; }

inline Collection parse_collection(std::string_view s) {
    if (s == "photo") return Collection::photo;
    if (s == "tweet") return Collection::tweet;
    throw ConfigError("unknown collection '" + std::string(s) + "'");
}

// Insertion sequence number within a collection; (collection, seq) is unique
// within the store.
struct DocId {
    Collection collection = Collection::tweet;
    std::uint64_t seq = 0;

    std::string str() const { return std::string(to_string(collection)) + "/" + std::to_string(seq); }

    friend auto operator<=>(const DocId&, const DocId&) = default;
};

struct StoredDocument {
    DocId doc_id;
    nlohmann::json body;

    Collection collection() const noexcept { return doc_id.collection; }
};

struct StoreStats {
    std::uint64_t tweet_count = 0;
    std::uint64_t photo_count = 0;

    friend bool operator==(const StoreStats&, const StoreStats&) = default;
};

// ---------------------------------------------------------------------------
// Schema

namespace detail {

using nlohmann::json;

inline void require_keys(const json& obj, const std::string& path,
                         std::initializer_list<std::string_view> keys) {
    if (!obj.is_object()) {
        throw ValidationError(path, path + " must be an object");
    }
    for (auto key : keys) {
        if (!obj.contains(key)) {
            const std::string p = path + "." + std::string(key);
            throw ValidationError(p, "missing field " + p);
        }
    }
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (auto k : keys) known = known || key == k;
        if (!known) {
            const std::string p = path + "." + key;
            throw ValidationError(p, "unexpected field " + p);
        }
    }
}

inline double require_number(const json& v, const std::string& path) {
    if (!v.is_number()) {
        throw ValidationError(path, path + " must be a number");
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
        throw ValidationError(path, path + " must be finite");
    }
    return d;
}

inline void require_string(const json& v, const std::string& path) {
    if (!v.is_string()) {
        throw ValidationError(path, path + " must be a string");
    }
}

inline void require_lat_lon(const json& obj, const std::string& path) {
    const double lat = require_number(obj.at("latitude"), path + ".latitude");
    const double lon = require_number(obj.at("longitude"), path + ".longitude");
    if (lat < -90.0 || lat > 90.0) {
        throw ValidationError(path + ".latitude", path + ".latitude outside [-90, 90]");
    }
    if (lon < -180.0 || lon > 180.0) {
        throw ValidationError(path + ".longitude", path + ".longitude outside [-180, 180]");
    }
}

}  // namespace detail

// Throws ValidationError naming the first offending path. geo / coordinates
// may be null (record without location) but never absent.
inline void validate_body(Collection collection, const nlohmann::json& body) {
    using namespace detail;
    if (collection == Collection::photo) {
        require_keys(body, "photo", {"geo", "name"});
        require_string(body.at("name"), "photo.name");
        const auto& geo = body.at("geo");
        if (geo.is_null()) return;
        require_keys(geo, "photo.geo", {"latitude", "longitude", "accuracy"});
        require_lat_lon(geo, "photo.geo");
        const auto& acc = geo.at("accuracy");
        if (!acc.is_number_integer()) {
            throw ValidationError("photo.geo.accuracy", "photo.geo.accuracy must be an integer");
        }
        const auto a = acc.get<std::int64_t>();
        if (a < ingest::kMinAccuracy || a > ingest::kMaxAccuracy) {
            throw ValidationError("photo.geo.accuracy", "photo.geo.accuracy outside [1, 16]");
        }
        return;
    }
    require_keys(body, "tweet", {"coordinates", "source", "text"});
    require_string(body.at("source"), "tweet.source");
    require_string(body.at("text"), "tweet.text");
    const auto& coords = body.at("coordinates");
    if (coords.is_null()) return;
    require_keys(coords, "tweet.coordinates", {"coordinates", "type"});
    const auto& type = coords.at("type");
    if (!type.is_string() || type.get<std::string>() != "Point") {
        throw ValidationError("tweet.coordinates.type", "tweet.coordinates.type must be \"Point\"");
    }
    require_keys(coords.at("coordinates"), "tweet.coordinates.coordinates", {"latitude", "longitude"});
    require_lat_lon(coords.at("coordinates"), "tweet.coordinates.coordinates");
}

inline nlohmann::json tweet_body(const ingest::RawTweet& tweet) {
    nlohmann::json body;
    if (tweet.coordinates) {
        body["coordinates"] = {{"coordinates",
                                {{"latitude", tweet.coordinates->lat_deg()},
                                 {"longitude", tweet.coordinates->lon_deg()}}},
                               {"type", "Point"}};
    } else {
        body["coordinates"] = nullptr;
    }
    body["source"] = tweet.source;
    body["text"] = tweet.text;
    return body;
}

inline nlohmann::json photo_body(const std::optional<ingest::RawPhotoGeo>& geo, const std::string& name) {
    nlohmann::json body;
    if (geo) {
        body["geo"] = {{"latitude", geo->location.lat_deg()},
                       {"longitude", geo->location.lon_deg()},
                       {"accuracy", geo->accuracy}};
    } else {
        body["geo"] = nullptr;
    }
    body["name"] = name;
    return body;
}

// Location of a schema-valid document, if it has one.
inline std::optional<GeoPoint> document_location(Collection collection, const nlohmann::json& body) {
    const nlohmann::json* ll = nullptr;
    if (collection == Collection::photo) {
        const auto& geo = body.at("geo");
        if (geo.is_null()) return std::nullopt;
        ll = &geo;
    } else {
        const auto& coords = body.at("coordinates");
        if (coords.is_null()) return std::nullopt;
        ll = &coords.at("coordinates");
    }
    return GeoPoint(ll->at("latitude").get<double>(), ll->at("longitude").get<double>());
}

// ---------------------------------------------------------------------------
// Store

enum class OpenMode { read_only, read_write };

namespace detail {

class FileDescriptor {
public:
    FileDescriptor() = default;
    explicit FileDescriptor(int fd) : fd_(fd) {}
    FileDescriptor(FileDescriptor&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
    FileDescriptor& operator=(FileDescriptor&& other) noexcept {
        if (this != &other) {
            reset();
            fd_ = std::exchange(other.fd_, -1);
        }
        return *this;
    }
    FileDescriptor(const FileDescriptor&) = delete;
    FileDescriptor& operator=(const FileDescriptor&) = delete;
    ~FileDescriptor() { reset(); }

    int get() const noexcept { return fd_; }
    explicit operator bool() const noexcept { return fd_ >= 0; }

    void reset() noexcept {
        if (fd_ >= 0) ::close(fd_);
        fd_ = -1;
    }

private:
    int fd_ = -1;
};

inline std::string errno_message(const std::string& what, const std::filesystem::path& path) {
    return what + " " + path.string() + ": " + std::strerror(errno);
}

inline std::string crc32_hex(std::string_view bytes) {
    const uLong crc = ::crc32(::crc32(0L, Z_NULL, 0), reinterpret_cast<const Bytef*>(bytes.data()),
                              static_cast<uInt>(bytes.size()));
    char buf[9];
    std::snprintf(buf, sizeof buf, "%08lx", static_cast<unsigned long>(crc));
    return buf;
}

inline std::string encode_line(const DocId& id, const nlohmann::json& body) {
    const std::string canonical = body.dump();
    nlohmann::json line;
    line["body"] = body;
    line["doc_id"] = id.seq;
    line["integrity"] = {{"crc32", crc32_hex(canonical)}, {"length", canonical.size()}};
    return line.dump() + "\n";
}

inline StoredDocument decode_line(Collection collection, std::string_view line,
                                  const std::filesystem::path& file, std::uint64_t line_no) {
    const auto fail = [&](const std::string& why) {
        return StorageError(file.string() + ":" + std::to_string(line_no) + ": " + why);
    };
    nlohmann::json parsed;
    try {
        parsed = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw fail(std::string("corrupt line: ") + e.what());
    }
    if (!parsed.is_object() || !parsed.contains("body") || !parsed.contains("doc_id") ||
        !parsed.contains("integrity")) {
        throw fail("line lacks body/doc_id/integrity");
    }
    const std::string canonical = parsed["body"].dump();
    const auto& integrity = parsed["integrity"];
    if (integrity.value("length", std::uint64_t{0}) != canonical.size() ||
        integrity.value("crc32", std::string{}) != crc32_hex(canonical)) {
        throw fail("integrity check failed");
    }
    return StoredDocument{DocId{collection, parsed["doc_id"].get<std::uint64_t>()},
                          std::move(parsed["body"])};
}

}  // namespace detail

class DocumentStore {
public:
    // read_write creates the directory if needed and takes the writer lock;
    // a second concurrent writer fails with StorageError.
    static DocumentStore open(const std::filesystem::path& dir, OpenMode mode = OpenMode::read_write) {
        DocumentStore store;
        store.dir_ = dir;
        store.mode_ = mode;
        std::error_code ec;
        if (mode == OpenMode::read_write) {
            std::filesystem::create_directories(dir, ec);
            if (ec) throw StorageError("cannot create store directory " + dir.string() + ": " + ec.message());
            const auto lock_path = dir / "LOCK";
            store.lock_ = detail::FileDescriptor(::open(lock_path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644));
            if (!store.lock_) throw StorageError(detail::errno_message("cannot open", lock_path));
            if (::flock(store.lock_.get(), LOCK_EX | LOCK_NB) != 0) {
                throw StorageError("store " + dir.string() + " is locked by another writer");
            }
            for (auto c : {Collection::photo, Collection::tweet}) {
                store.recover(c);
            }
        } else {
            if (!std::filesystem::is_directory(dir, ec)) {
                throw StorageError("store directory " + dir.string() + " does not exist");
            }
        }
        return store;
    }

    std::filesystem::path path_of(Collection c) const {
        return dir_ / (std::string(to_string(c)) + ".jsonl");
    }

    // Validates, appends and fsyncs before returning.
    DocId put(Collection collection, const nlohmann::json& body) {
        if (mode_ != OpenMode::read_write) {
            throw StorageError("store opened read-only");
        }
        validate_body(collection, body);
        auto& slot = writers_[index(collection)];
        const auto path = path_of(collection);
        if (!slot.fd) {
            slot.fd = detail::FileDescriptor(::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644));
            if (!slot.fd) throw StorageError(detail::errno_message("cannot open", path));
        }
        const DocId id{collection, slot.next_seq};
        const std::string line = detail::encode_line(id, body);
        std::size_t written = 0;
        while (written < line.size()) {
            const ssize_t n = ::write(slot.fd.get(), line.data() + written, line.size() - written);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw StorageError(detail::errno_message("write failed on", path));
            }
            written += static_cast<std::size_t>(n);
        }
        if (::fsync(slot.fd.get()) != 0) {
            throw StorageError(detail::errno_message("fsync failed on", path));
        }
        ++slot.next_seq;
        return id;
    }

    // Visits documents in insertion order. geo_only skips documents without a
    // location. Only complete ('\n'-terminated) lines are visible.
    void scan(Collection collection, bool geo_only,
              const std::function<void(const StoredDocument&)>& visit) const {
        const auto path = path_of(collection);
        std::error_code ec;
        if (!std::filesystem::exists(path, ec)) return;
        std::ifstream in(path, std::ios::binary);
        if (!in) throw StorageError("cannot open " + path.string());
        std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        if (in.bad()) throw StorageError("read failed on " + path.string());

        std::uint64_t line_no = 0;
        std::size_t pos = 0;
        while (pos < content.size()) {
            const auto nl = content.find('\n', pos);
            if (nl == std::string::npos) break;  // torn tail from an interrupted write
            ++line_no;
            const std::string_view line(content.data() + pos, nl - pos);
            pos = nl + 1;
            auto doc = detail::decode_line(collection, line, path, line_no);
            if (geo_only && !document_location(collection, doc.body)) continue;
            visit(doc);
        }
    }

    std::vector<StoredDocument> scan(Collection collection, bool geo_only = false) const {
        std::vector<StoredDocument> docs;
        scan(collection, geo_only, [&](const StoredDocument& d) { docs.push_back(d); });
        return docs;
    }

    std::optional<StoredDocument> get(const DocId& id) const {
        std::optional<StoredDocument> found;
        scan(id.collection, false, [&](const StoredDocument& d) {
            if (!found && d.doc_id == id) found = d;
        });
        return found;
    }

    StoreStats stats() const {
        StoreStats s;
        scan(Collection::tweet, false, [&](const StoredDocument&) { ++s.tweet_count; });
        scan(Collection::photo, false, [&](const StoredDocument&) { ++s.photo_count; });
        return s;
    }

    const std::filesystem::path& directory() const noexcept { return dir_; }

private:
    struct Writer {
        detail::FileDescriptor fd;
        std::uint64_t next_seq = 0;
    };

    DocumentStore() = default;

    static std::size_t index(Collection c) { return c == Collection::photo ? 0 : 1; }

    // Drops a torn final line and positions the sequence counter.
    void recover(Collection collection) {
        const auto path = path_of(collection);
        std::error_code ec;
        if (!std::filesystem::exists(path, ec)) return;
        std::ifstream in(path, std::ios::binary);
        std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        const auto last_nl = content.rfind('\n');
        const std::size_t keep = last_nl == std::string::npos ? 0 : last_nl + 1;
        if (keep != content.size()) {
            std::filesystem::resize_file(path, keep, ec);
            if (ec) throw StorageError("cannot truncate torn line in " + path.string() + ": " + ec.message());
        }
        std::uint64_t count = 0;
        scan(collection, false, [&](const StoredDocument& d) {
            if (d.doc_id.seq != count) {
                throw StorageError(path.string() + ": doc_id " + std::to_string(d.doc_id.seq) +
                                   " out of sequence (expected " + std::to_string(count) + ")");
            }
            ++count;
        });
        writers_[index(collection)].next_seq = count;
    }

    std::filesystem::path dir_;
    OpenMode mode_ = OpenMode::read_only;
    detail::FileDescriptor lock_;
    Writer writers_[2];
};

}  // namespace zoi::store
