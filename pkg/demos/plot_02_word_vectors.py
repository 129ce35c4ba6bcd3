"""
Which mastered goal is closest to a new one?
============================================

Rank the goals an agent already knows by cosine similarity to a new target
word.  The top-ranked word supplies the prior policy during transfer.
"""

from lexnav.embedding import default_store, similarity_matrix, similarity_report

store = default_store()
print(store.dimension, "dimensional vectors for", ", ".join(store.words))

report = similarity_report(store, "bathtub", ["shower", "toilet", "bed", "toaster"])
print(report.format_table())

# The ranking only depends on directions, so rescaling the table changes nothing.
scaled = similarity_report(store.scaled(40.0), "bathtub", ["shower", "toilet", "bed", "toaster"])
print("same order after scaling:", [w for w, _ in scaled.rankings] == [w for w, _ in report.rankings])

words = ["shower", "bathtub", "toilet", "bed", "toaster"]
matrix = similarity_matrix(store, words, words)
for w, row in zip(words, matrix):
    print(f"{w:>8}", " ".join(f"{v:5.2f}" for v in row))
