#include "patternmine/miner.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <limits>
#include <mutex>
#include <set>
#include <thread>

#include "patternmine/error.hpp"
#include "patternmine/text_util.hpp"

namespace patternmine {

DocumentMiner::DocumentMiner(std::vector<CompiledMatcher> matchers)
    : matchers_(std::move(matchers)), by_first_byte_(256) {
  if (matchers_.size() > 64) {
    prefilter_ = false;
    return;
  }
  for (std::size_t i = 0; i < matchers_.size(); ++i) {
    for (const auto& v : matchers_[i].verbalizers) {
      std::string lowered = ascii_lowercase(v);
      auto& bucket = by_first_byte_[static_cast<unsigned char>(lowered.front())];
      auto it = std::find_if(bucket.begin(), bucket.end(),
                             [&](const Entry& e) { return e.lowered == lowered; });
      if (it == bucket.end()) {
        bucket.push_back({std::move(lowered), std::uint64_t{1} << i});
      } else {
        it->mask |= std::uint64_t{1} << i;
      }
    }
  }
}

std::uint64_t DocumentMiner::candidate_mask(std::string_view doc) const {
  const std::uint64_t all =
      matchers_.size() == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << matchers_.size()) - 1;
  if (!prefilter_) return all;
  std::uint64_t mask = 0;
  const std::size_t n = doc.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& bucket = by_first_byte_[static_cast<unsigned char>(ascii_lower(doc[i]))];
    if (bucket.empty()) continue;
    for (const Entry& e : bucket) {
      if ((mask & e.mask) == e.mask || e.lowered.size() > n - i) continue;
      std::size_t k = 1;
      while (k < e.lowered.size() && ascii_lower(doc[i + k]) == e.lowered[k]) ++k;
      if (k == e.lowered.size()) mask |= e.mask;
    }
    if (mask == all) break;
  }
  return mask;
}

std::vector<MinedExample> DocumentMiner::mine(std::string_view doc, std::uint64_t shard_id,
                                              std::uint64_t doc_index, Counters* counters) const {
  std::vector<MinedExample> found;
  const std::uint64_t mask = candidate_mask(doc);
  if (mask == 0) return found;

  std::vector<std::size_t> owner;  // matcher index per found example
  auto long_enough = [](std::string_view s) { return utf8_length(s) >= kMinSentenceLength; };
  for (std::size_t i = 0; i < matchers_.size(); ++i) {
    if (!(mask >> i & 1)) continue;
    const CompiledMatcher& m = matchers_[i];
    std::size_t pos = 0;
    while (auto match = m.search(doc, pos)) {
      pos = std::max(match->whole.end, match->whole.begin + 1);
      if (counters) ++counters->matches;
      auto text_of = [&](Span s) { return trim(doc.substr(s.begin, s.size())); };
      MinedExample ex;
      ex.pair = m.arity == Arity::pair_input;
      if (ex.pair) {
        const std::string_view hyp = text_of(match->hyp);
        const std::string_view prem = text_of(match->prem);
        if (!long_enough(hyp) || !long_enough(prem)) {
          if (counters) ++counters->too_short;
          continue;
        }
        ex.hyp = hyp;
        ex.prem = prem;
      } else {
        const std::string_view input = text_of(match->input);
        if (!long_enough(input)) {
          if (counters) ++counters->too_short;
          continue;
        }
        ex.input = input;
      }
      const std::string_view verbalizer =
          doc.substr(match->verbalizer.begin, match->verbalizer.size());
      const std::string* canonical = m.canonical_verbalizer(verbalizer);
      ex.verbalizer = canonical ? *canonical : std::string(verbalizer);
      ex.label = m.label;
      ex.ref = {shard_id, doc_index, match->whole.begin};
      ex.matched_span = doc.substr(match->whole.begin, match->whole.size());
      ex.pattern_index = m.pattern_index;
      found.push_back(std::move(ex));
      owner.push_back(i);
    }
  }
  if (found.size() < 2) return found;

  std::vector<std::size_t> order(found.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (found[a].ref.byte_offset != found[b].ref.byte_offset) {
      return found[a].ref.byte_offset < found[b].ref.byte_offset;
    }
    return owner[a] < owner[b];
  });
  std::vector<MinedExample> merged;
  merged.reserve(found.size());
  for (std::size_t idx : order) {
    if (!merged.empty() && merged.back().ref.byte_offset == found[idx].ref.byte_offset) {
      if (counters) ++counters->offset_collisions;
      continue;
    }
    merged.push_back(std::move(found[idx]));
  }
  return merged;
}

std::vector<MinedExample> mine_document(std::string_view doc,
                                        std::span<const CompiledMatcher> matchers,
                                        std::uint64_t shard_id, std::uint64_t doc_index) {
  DocumentMiner miner({matchers.begin(), matchers.end()});
  return miner.mine(doc, shard_id, doc_index);
}

namespace {

struct ShardResult {
  std::vector<MinedExample> examples;
  std::vector<std::uint64_t> bucket_counts;
  std::uint64_t documents = 0;
  std::uint64_t bytes = 0;
  std::uint64_t malformed = 0;
  DocumentMiner::Counters counters;
  std::exception_ptr error;
};

// Flat (class, verbalizer) bucket numbering in declaration order.
class BucketIndex {
 public:
  explicit BucketIndex(const TaskSpec& task) {
    for (const auto& c : task.classes) {
      offsets_.push_back(size_);
      size_ += c.verbalizers.size();
    }
  }
  std::size_t size() const { return size_; }
  std::size_t of(const TaskSpec& task, const MinedExample& ex) const {
    const std::size_t c = task.class_index(ex.label);
    const auto& vs = task.classes[c].verbalizers;
    const auto it = std::find(vs.begin(), vs.end(), ex.verbalizer);
    return offsets_[c] + static_cast<std::size_t>(it - vs.begin());
  }

 private:
  std::vector<std::size_t> offsets_;
  std::size_t size_ = 0;
};

ShardResult mine_shard(const CorpusShard& shard, const DocumentMiner& miner, const TaskSpec& task,
                       const BucketIndex& buckets) {
  ShardResult r;
  r.bucket_counts.assign(buckets.size(), 0);
  DocumentStream stream(shard);
  Document doc;
  while (stream.next(doc)) {
    ++r.documents;
    auto found = miner.mine(doc.text, shard.shard_id, doc.doc_index, &r.counters);
    for (auto& ex : found) {
      ++r.bucket_counts[buckets.of(task, ex)];
      r.examples.push_back(std::move(ex));
    }
  }
  r.bytes = stream.bytes_read();
  r.malformed = stream.malformed_count();
  return r;
}

}  // namespace

MiningResult mine_corpus(std::span<const CorpusShard> shards, const TaskSpec& task,
                         const MiningOptions& options) {
  if (shards.empty()) throw Error(ErrorCode::InvalidArgument, "mine_corpus: no shards");
  const DocumentMiner miner(compile_task(task));
  const BucketIndex buckets(task);
  const std::size_t n = shards.size();
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  std::vector<ShardResult> results(n);
  std::vector<char> done(n, 0);
  std::vector<std::uint64_t> cumulative(buckets.size(), 0);
  std::size_t prefix_end = 0;
  std::mutex mu;
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> stop_after{kNone};  // last shard of the output
  std::atomic<std::size_t> failed_at{kNone};

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      if (i > stop_after.load() || i > failed_at.load()) continue;
      try {
        results[i] = mine_shard(shards[i], miner, task, buckets);
      } catch (...) {
        results[i].error = std::current_exception();
        std::size_t prev = failed_at.load();
        while (i < prev && !failed_at.compare_exchange_weak(prev, i)) {
        }
      }
      std::lock_guard lock(mu);
      done[i] = 1;
      while (prefix_end < n && done[prefix_end] && stop_after.load() == kNone) {
        const ShardResult& r = results[prefix_end];
        if (r.error) break;
        for (std::size_t b = 0; b < cumulative.size(); ++b) cumulative[b] += r.bucket_counts[b];
        if (options.per_class_cap > 0 &&
            std::all_of(cumulative.begin(), cumulative.end(),
                        [&](std::uint64_t c) { return c >= options.per_class_cap; })) {
          stop_after.store(prefix_end);
        }
        ++prefix_end;
      }
    }
  };

  const unsigned workers =
      std::clamp<unsigned>(options.workers, 1, static_cast<unsigned>(std::min<std::size_t>(n, 256)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  const std::size_t last = stop_after.load() == kNone ? n - 1 : stop_after.load();
  MiningResult out;
  MiningStats& stats = out.stats;
  stats.shards_total = n;
  stats.shards_processed = last + 1;
  stats.stopped_early = last + 1 < n;
  for (std::size_t i = 0; i <= last; ++i) {
    if (results[i].error) std::rethrow_exception(results[i].error);
  }
  for (std::size_t i = 0; i <= last; ++i) {
    ShardResult& r = results[i];
    stats.documents += r.documents;
    stats.bytes += r.bytes;
    stats.malformed_records += r.malformed;
    stats.raw_matches += r.counters.matches;
    stats.dropped_too_short += r.counters.too_short;
    stats.offset_collisions += r.counters.offset_collisions;
    for (auto& ex : r.examples) out.examples.push_back(std::move(ex));
    r = ShardResult{};
  }

  if (options.dedup) {
    std::set<std::pair<std::string, std::string>> seen;
    std::vector<MinedExample> unique;
    unique.reserve(out.examples.size());
    for (auto& ex : out.examples) {
      std::string key = ex.pair ? ex.hyp + '\x1f' + ex.prem : ex.input;
      if (seen.emplace(ex.label, std::move(key)).second) {
        unique.push_back(std::move(ex));
      } else {
        ++stats.duplicates_removed;
      }
    }
    out.examples = std::move(unique);
  }

  for (const auto& c : task.classes) {
    for (const auto& v : c.verbalizers) stats.per_bucket[c.label][v] = 0;
  }
  for (const auto& ex : out.examples) ++stats.per_bucket[ex.label][ex.verbalizer];
  return out;
}

}  // namespace patternmine
