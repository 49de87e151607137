# fuzzforge: synthetic fire-imagery dataset engine
