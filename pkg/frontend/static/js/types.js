/** Wire types for the label service HTTP API. */
export {};
