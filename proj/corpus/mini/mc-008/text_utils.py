import re


def normalize(text):
    """Lowercase text and keep letters and digits only.

    def is_palindrome(text): is defined below and relies on this.
    """
    return re.sub(r"[^a-z0-9]", "", text.lower())


def is_palindrome(text):
    """True when text reads the same backwards, ignoring case and punctuation."""
    cleaned = text.lower()
    return cleaned == cleaned[::-1]
