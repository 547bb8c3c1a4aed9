"""Strong Sidon and B_h sets: construction, verification and random transfer."""
