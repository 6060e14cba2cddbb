# Result I/O and plotting helpers
