#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "core/mutaframe.hpp"

namespace lv {

enum class LinkKind { identity, categorical, knn };
enum class Metric { euclidean, manhattan };

std::optional<LinkKind> parse_link_kind(std::string_view text);
std::optional<Metric> parse_metric(std::string_view text);
std::string_view to_string(LinkKind kind);
std::string_view to_string(Metric metric);

struct LinkSpec {
  LinkKind kind = LinkKind::identity;
  std::string source;
  std::string target;  // equal to source for self-linking
  std::string source_key, target_key;  // categorical
  std::vector<std::string> vars;       // knn
  std::size_t k = 1;
  Metric metric = Metric::euclidean;
  bool standardize = false;  // knn: divide each variable by its standard deviation
};

using LinkId = std::uint64_t;

// All rows sharing a category with any seed row. Missing keys never match.
RowSet resolve_categorical(const Mutaframe& table, std::string_view key, const RowSet& seed);

// Seeds plus the k nearest distinct neighbours of each seed (ties: lower row
// index). Rows with a missing value in any variable are never candidates.
RowSet resolve_knn(const Mutaframe& table, const std::vector<std::string>& vars, std::size_t k,
                   Metric metric, const RowSet& seed, bool standardize = false);

// Target rows whose key label equals the key label of some brushed source row.
RowSet transfer_categorical(const Mutaframe& source, std::string_view source_key,
                            const Mutaframe& target, std::string_view target_key,
                            const RowSet& source_rows);

struct LinkSkip {
  Epoch epoch;
  LinkId link;
  std::string target;
};

// Moves `.brushed` changes across tables according to registered links.
// Within one epoch each table is written by the engine at most once, and the
// table the user brushed is only rewritten by its own self-links, so any link
// graph (cycles included) quiesces after one pass.
class LinkEngine {
 public:
  using TableLookup = std::function<std::shared_ptr<Mutaframe>(std::string_view id)>;

  explicit LinkEngine(TableLookup lookup);
  LinkEngine(const LinkEngine&) = delete;
  LinkEngine& operator=(const LinkEngine&) = delete;
  ~LinkEngine();

  LinkId register_link(LinkSpec spec);
  void remove_link(LinkId id);
  const LinkSpec& link(LinkId id) const;
  std::size_t size() const noexcept { return links_.size(); }

  void propagate(const ChangeNotice& notice);

  std::uint64_t writes() const noexcept { return writes_; }
  const std::vector<LinkSkip>& skips() const noexcept { return skips_; }
  Epoch current_epoch() const noexcept { return epoch_; }
  const std::set<std::string>& written_this_epoch() const noexcept { return written_; }

 private:
  struct Entry {
    LinkId id;
    LinkSpec spec;
  };
  struct Watch {
    std::weak_ptr<Mutaframe> table;
    ListenerId listener;
  };

  void validate(const LinkSpec& spec) const;
  std::shared_ptr<Mutaframe> table(std::string_view id) const;
  RowSet resolve(const Entry& entry, const Mutaframe& source, const Mutaframe& target) const;

  TableLookup lookup_;
  std::vector<Entry> links_;
  std::vector<Watch> watches_;
  std::set<std::string> watched_tables_;
  LinkId next_id_ = 1;

  Epoch epoch_ = 0;
  std::string origin_;
  std::set<std::string> written_;
  std::uint64_t writes_ = 0;
  std::vector<LinkSkip> skips_;
};

}  // namespace lv
