/** Wire types for the review service's JSON API. */
export {};
