"""Численные модули: модельные отображения, продолжение, бифуркации, асимптотики, система Лоренца-Стенфло."""
