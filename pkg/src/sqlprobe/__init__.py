"""sqlprobe: robustness evaluation harness for NL2SQL systems.

Generates schema-grounded paraphrases from gold SQL, scores NL2SQL
predictions by execution match, and produces degradation, schema-error,
linguistic-similarity, and Pass@K analyses.
"""

__version__ = "0.1.0"
