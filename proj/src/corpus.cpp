#include "patternmine/corpus.hpp"

#include <algorithm>
#include <cstring>

#include "json.hpp"
#include "patternmine/error.hpp"
#include "patternmine/text_util.hpp"

namespace patternmine {

std::optional<ShardFormat> shard_format_for(const std::filesystem::path& path) {
  const std::string ext = ascii_lowercase(path.extension().string());
  if (ext == ".jsonl" || ext == ".json") return ShardFormat::jsonl_text_field;
  if (ext == ".txt" || ext == ".text") return ShardFormat::plain_text;
  return std::nullopt;
}

std::vector<CorpusShard> list_shards(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw Error(ErrorCode::ShardIOError, "corpus directory not found: " + dir.string());
  }
  std::vector<fs::path> files;
  for (fs::directory_iterator it(dir, ec), end; !ec && it != end; it.increment(ec)) {
    const fs::path& p = it->path();
    if (p.filename().string().starts_with('.')) continue;
    if (!it->is_regular_file(ec) || !shard_format_for(p)) continue;
    files.push_back(p);
  }
  if (ec) throw Error(ErrorCode::ShardIOError, "cannot list " + dir.string() + ": " + ec.message());
  if (files.empty()) throw Error(ErrorCode::ShardIOError, "no shards in " + dir.string());
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  std::vector<CorpusShard> shards;
  for (std::size_t i = 0; i < files.size(); ++i) {
    shards.push_back({i, files[i], *shard_format_for(files[i])});
  }
  return shards;
}

DocumentStream::DocumentStream(const CorpusShard& shard, std::size_t buffer_size)
    : shard_(shard), in_(shard.path, std::ios::binary), buffer_(std::max<std::size_t>(buffer_size, 64)) {
  if (!in_) throw Error(ErrorCode::ShardIOError, "cannot open shard " + shard.path.string());
}

bool DocumentStream::next_line(std::string_view& line) {
  carry_.clear();
  for (;;) {
    if (begin_ < end_) {
      const char* start = buffer_.data() + begin_;
      const void* nl = std::memchr(start, '\n', end_ - begin_);
      if (nl) {
        const auto len = static_cast<std::size_t>(static_cast<const char*>(nl) - start);
        begin_ += len + 1;
        if (carry_.empty()) {
          line = std::string_view(start, len);
        } else {
          carry_.append(start, len);
          line = carry_;
        }
        return true;
      }
      carry_.append(start, end_ - begin_);
      begin_ = end_;
    }
    if (eof_) {
      if (carry_.empty()) return false;
      line = carry_;
      return true;
    }
    in_.read(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
    if (in_.bad()) throw Error(ErrorCode::ShardIOError, "read failed: " + shard_.path.string());
    begin_ = 0;
    end_ = static_cast<std::size_t>(in_.gcount());
    bytes_read_ += end_;
    if (end_ < buffer_.size()) eof_ = true;
  }
}

bool DocumentStream::next(Document& doc) {
  std::string_view line;
  while (next_line(line)) {
    const std::uint64_t index = line_index_++;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (shard_.format == ShardFormat::plain_text) {
      doc = {index, line};
      return true;
    }
    if (trim(line).empty()) continue;
    auto record = nlohmann::json::parse(line, nullptr, false);
    auto it = record.is_object() ? record.find("text") : record.end();
    if (record.is_discarded() || !record.is_object() || it == record.end() || !it->is_string()) {
      ++malformed_;
      continue;
    }
    decoded_ = it->get<std::string>();
    doc = {index, decoded_};
    return true;
  }
  return false;
}

}  // namespace patternmine
