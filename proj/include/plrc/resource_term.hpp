#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "plrc/rational.hpp"

namespace plrc::resource {

class ResourceTerm;
using ResourcePtr = std::shared_ptr<const ResourceTerm>;

// Simple resource term (or bag of them).  Linear applications take a bag
// (finite multiset) of arguments; choice tags l{p}/r{p} record which branch
// of a probabilistic choice was taken and with which probability.  Bags are
// kept sorted under the structural order, so equal multisets are equal trees.
class ResourceTerm {
  public:
    enum class Kind { BoundVar, FreeVar, Abs, LinApp, LeftTag, RightTag, Bag };

    static ResourcePtr bound(int index);
    static ResourcePtr free(std::string name);
    static ResourcePtr abs(ResourcePtr body);
    static ResourcePtr lin_app(ResourcePtr head, ResourcePtr bag);
    static ResourcePtr left_tag(const Rational& p, ResourcePtr body);
    static ResourcePtr right_tag(const Rational& p, ResourcePtr body);
    static ResourcePtr bag(std::vector<ResourcePtr> elems);

    Kind kind() const { return kind_; }
    bool is_bag() const { return kind_ == Kind::Bag; }
    int index() const { return index_; }
    const std::string& name() const { return name_; }
    const Rational& prob() const { return prob_; }
    const ResourcePtr& body() const { return a_; }  // Abs / tags
    const ResourcePtr& head() const { return a_; }  // LinApp
    const ResourcePtr& args() const { return b_; }  // LinApp (a Bag node)
    const std::vector<ResourcePtr>& elems() const { return elems_; }

    // size counts every constructor except the bag former itself.
    unsigned size() const { return size_; }
    unsigned tag_count() const { return tags_; }
    unsigned erased_size() const { return size_ - tags_; }
    bool choice_free() const { return tags_ == 0; }
    // True iff no beta and no tag-lifting redex occurs anywhere.
    bool is_normal() const { return normal_; }

    static int compare(const ResourceTerm& a, const ResourceTerm& b);

  private:
    Kind kind_;
    int index_ = 0;
    std::string name_;
    Rational prob_;
    ResourcePtr a_, b_;
    std::vector<ResourcePtr> elems_;
    unsigned size_ = 1;
    unsigned tags_ = 0;
    bool normal_ = true;

    explicit ResourceTerm(Kind k) : kind_(k) {}
};

struct ResourceLess {
    bool operator()(const ResourcePtr& a, const ResourcePtr& b) const {
        return ResourceTerm::compare(*a, *b) < 0;
    }
};

inline bool operator==(const ResourceTerm& a, const ResourceTerm& b) {
    return ResourceTerm::compare(a, b) == 0;
}

bool equal(const ResourcePtr& a, const ResourcePtr& b);

std::set<std::string> free_names(const ResourcePtr& t);

std::string to_string(const ResourcePtr& t);

ResourcePtr shift(const ResourcePtr& t, int delta, int cutoff = 0);

}  // namespace plrc::resource
