"""Build a clarification tree and show how Yes/No marks shape the prompt.

The tree is a complete K-ary structure: the root is the client's question and
every expanded node contributes K candidate clarification questions grounded
in retrieved precedent. Marks partition the non-root nodes into affirmed and
negated facts; unmarked nodes simply drop out.
"""

from lawluo.backends import MockBackend
from lawluo.tolc import apply_marks, build_tree, compose_clarified_prompt


def no_retrieval(text, k):
    return []


def main() -> None:
    backend = MockBackend()
    tree = build_tree("I want a divorce", backend, no_retrieval, K=2, H=3, seed=1)

    print(f"tree with K={tree.K}, H={tree.H}: {tree.node_count()} nodes")
    for node in sorted(tree.nodes.values(), key=lambda n: n.index):
        indent = "  " * (node.layer - 1)
        print(f"{indent}[{node.index}] {node.text}")

    marks = {2: "yes", 3: "no", 4: "yes"}
    verified = apply_marks(tree, marks)
    print()
    print(f"marks {marks} ->")
    print(f"  affirmed: {len(verified.affirmed)} facts")
    print(f"  negated:  {len(verified.negated)} facts")

    print()
    print("prompt handed to the lawyer:")
    print(compose_clarified_prompt(verified))


if __name__ == "__main__":
    main()
