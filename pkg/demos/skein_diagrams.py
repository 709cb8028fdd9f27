"""Evaluating planar diagrams with the skein calculus."""
from fibanyon.skein import evaluate, format_value

diagrams = {
    "bubble": "cup(1); cap(1)",
    "two nested bubbles": "cup(1); cup(2); cap(2); cap(1)",
    "zigzag": "id(1); cup(2); cap(1)",
    "nested cups (the alpha state)": "cup(1); cup(2)",
    "crossing on two strands": "id(2); cross(1,+)",
    "Reidemeister II": "id(3); cross(2,+); cross(2,-)",
}
for name, src in diagrams.items():
    print(f"{name}: {src}")
    print(format_value(evaluate(src), digits=10))
    print()
