def merge_intervals(intervals):
    """Merge overlapping [start, end] pairs."""
    merged = []
    for start, end in intervals:
        if merged and start <= merged[-1][1]:
            merged[-1][1] = end
        else:
            merged.append([start, end])
    return merged
